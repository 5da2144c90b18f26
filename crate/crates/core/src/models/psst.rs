use rand::Rng;

use super::sampling::{sample, TailLaw, SATURATION};
use super::{check_open_unit, ModelError, OnOffChain};

/// Which states count as on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsstVariant {
    /// On only in state 0: exponential packet trains, heavy-tailed gaps.
    A,
    /// On everywhere except state 0.
    B,
}

/// The infinite PSST chain.
///
/// From state 0 the chain moves to state `i >= 1` with probability `a^-i`
/// and otherwise stays, so `Sigma_0 = 1 - 1/(a-1)`. In state `i` it stays
/// with probability `Sigma_i = 1 - (q/a)^i` and otherwise returns to 0.
/// The stationary law is geometric, `pi_k = pi_0 q^-k` with
/// `pi_0 = (q-1)/q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsstParams {
    a: f64,
    q: f64,
    variant: PsstVariant,
}

impl PsstParams {
    /// Needs `a > q > 1` and `a > 2`.
    pub fn new(a: f64, q: f64, variant: PsstVariant) -> Result<Self, ModelError> {
        if !(q > 1.0 && q.is_finite()) {
            return Err(ModelError::InvalidParameter { name: "q", value: q, reason: "must exceed 1" });
        }
        if !(a > q && a.is_finite()) {
            return Err(ModelError::InvalidParameter { name: "a", value: a, reason: "must exceed q" });
        }
        if a <= 2.0 {
            return Err(ModelError::InvalidParameter { name: "a", value: a, reason: "must exceed 2" });
        }
        Ok(Self { a, q, variant })
    }

    /// The `q` that gives long-run mean `mu` for `variant`:
    /// `1 / (1 - mu)` for A and `1 / mu` for B.
    pub fn fit_q(mu: f64, variant: PsstVariant) -> Result<f64, ModelError> {
        check_open_unit("mu", mu)?;
        Ok(match variant {
            PsstVariant::A => 1.0 / (1.0 - mu),
            PsstVariant::B => 1.0 / mu,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn variant(&self) -> PsstVariant {
        self.variant
    }

    pub fn with_variant(self, variant: PsstVariant) -> Self {
        Self { variant, ..self }
    }

    /// `(q-1)/q` for A, `1/q` for B.
    pub fn mean(&self) -> f64 {
        match self.variant {
            PsstVariant::A => (self.q - 1.0) / self.q,
            PsstVariant::B => 1.0 / self.q,
        }
    }

    pub fn equilibrium(&self, k: u64) -> f64 {
        (self.q - 1.0) / self.q * (-(k as f64) * self.q.ln()).exp()
    }

    /// `Sigma_0 = 1 - 1/(a-1)`.
    pub fn stay_at_zero(&self) -> f64 {
        1.0 - 1.0 / (self.a - 1.0)
    }

    /// `(q/a)^i`, the chance of leaving state `i >= 1` in one step.
    pub fn leave_prob(&self, i: u64) -> f64 {
        (i as f64 * (self.q / self.a).ln()).exp()
    }

    /// One first-return time to state 0, starting from state 0.
    ///
    /// Returns 1 when the chain stays put; otherwise 1 plus the geometric
    /// number of slots spent in the state it jumped to.
    pub fn sample_return_time<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let i = sample(self, rng);
        if i == 0 {
            return 1;
        }
        let ln_stay = (-self.leave_prob(i)).ln_1p();
        let u: f64 = 1.0 - rng.random::<f64>();
        let extra = u.ln() / ln_stay;
        if !(extra < SATURATION as f64) {
            return SATURATION;
        }
        2 + extra as u64
    }
}

impl TailLaw for PsstParams {
    /// Law of the state entered from 0, with 0 meaning "stay".
    fn ln_tail(&self, k: u64) -> f64 {
        if k == 0 {
            0.0
        } else {
            (1.0 - k as f64) * self.a.ln() - (self.a - 1.0).ln()
        }
    }
}

impl OnOffChain for PsstParams {
    fn next_state<R: Rng + ?Sized>(&self, state: u64, rng: &mut R) -> u64 {
        if state == 0 {
            sample(self, rng)
        } else if rng.random::<f64>() < self.leave_prob(state) {
            0
        } else {
            state
        }
    }

    fn transition_prob(&self, from: u64, to: u64) -> f64 {
        match (from, to) {
            (0, 0) => self.stay_at_zero(),
            (0, j) => (-(j as f64) * self.a.ln()).exp(),
            (i, 0) => self.leave_prob(i),
            (i, j) if i == j => 1.0 - self.leave_prob(i),
            _ => 0.0,
        }
    }

    fn equilibrium(&self, state: u64) -> f64 {
        PsstParams::equilibrium(self, state)
    }

    fn is_on(&self, state: u64) -> bool {
        match self.variant {
            PsstVariant::A => state == 0,
            PsstVariant::B => state != 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn means_and_fits() {
        let b = PsstParams::new(500.0, 10.4, PsstVariant::B).unwrap();
        assert!((b.mean() - 0.09615).abs() < 1e-5);
        assert!((PsstParams::fit_q(0.09615, PsstVariant::B).unwrap() - 10.4).abs() < 1e-3);
        assert!((PsstParams::fit_q(0.5, PsstVariant::A).unwrap() - 2.0).abs() < 1e-15);
        assert!((PsstParams::fit_q(0.094, PsstVariant::A).unwrap() - 1.1038).abs() < 1e-4);
        let a = PsstParams::new(3.0, 2.0, PsstVariant::A).unwrap();
        assert_eq!(a.mean(), 0.5);
    }

    #[test]
    fn equilibrium_is_geometric() {
        let p = PsstParams::new(3.0, 2.0, PsstVariant::A).unwrap();
        assert_eq!(p.equilibrium(0), 0.5);
        let total: f64 = (0..=200u64).rev().map(|k| p.equilibrium(k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let q = PsstParams::new(500.0, 10.4, PsstVariant::B).unwrap();
        assert!((q.equilibrium(2) - 0.008357).abs() < 1e-6);
    }

    #[test]
    fn rows_are_stochastic() {
        let p = PsstParams::new(4.0, 1.5, PsstVariant::B).unwrap();
        let row0: f64 = (1..200u64).rev().map(|j| p.transition_prob(0, j)).sum::<f64>() + p.transition_prob(0, 0);
        assert!((row0 - 1.0).abs() < 1e-12);
        for i in 1..100 {
            assert!((p.transition_prob(i, i) + p.transition_prob(i, 0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(PsstParams::new(2.0, 1.5, PsstVariant::A).is_err());
        assert!(PsstParams::new(5.0, 6.0, PsstVariant::A).is_err());
        assert!(PsstParams::new(5.0, 1.0, PsstVariant::A).is_err());
    }

    #[test]
    fn short_return_times() {
        // P(R0 = 1) = Sigma_0 = 1/2; P(R0 = 2) = sum_i 3^-i (2/3)^i = 2/7
        let p = PsstParams::new(3.0, 2.0, PsstVariant::B).unwrap();
        let mut rng = seeded(4);
        let n = 200_000;
        let mut ones = 0;
        let mut twos = 0;
        for _ in 0..n {
            match p.sample_return_time(&mut rng) {
                1 => ones += 1,
                2 => twos += 1,
                _ => {}
            }
        }
        let f1 = ones as f64 / n as f64;
        let f2 = twos as f64 / n as f64;
        assert!((f1 - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
        let se = (2.0 / 7.0 * 5.0 / 7.0 / n as f64).sqrt();
        assert!((f2 - 2.0 / 7.0).abs() < 4.0 * se, "{f2}");
    }
}
