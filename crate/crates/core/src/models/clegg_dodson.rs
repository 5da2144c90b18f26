use rand::Rng;

use super::sampling::{sample, TailLaw};
use super::{check_open_unit, ModelError, OnOffChain};

/// The Clegg/Dodson model: the Wang topology with jump probabilities chosen
/// so that the equilibrium tail is exactly `(1 - pi0) k^-alpha`.
///
/// With `c = (1 - pi0) / pi0`,
/// `f_0 = 1 - c (1 - 2^-alpha)` and
/// `f_k = c [k^-alpha - 2 (k+1)^-alpha + (k+2)^-alpha]`.
/// The chain is only valid while `f_0 > 0`, which needs
/// `pi0 > (2^alpha - 1) / (2^(alpha+1) - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleggDodsonParams {
    pi0: f64,
    alpha: f64,
}

/// `k^-alpha - (k+1)^-alpha`, accurate for large `k`.
fn first_difference(alpha: f64, k: f64) -> f64 {
    k.powf(-alpha) * -(-alpha * (1.0 / k).ln_1p()).exp_m1()
}

impl CleggDodsonParams {
    pub fn new(pi0: f64, alpha: f64) -> Result<Self, ModelError> {
        check_open_unit("pi0", pi0)?;
        check_open_unit("alpha", alpha)?;
        if pi0 <= Self::pi0_threshold(alpha) {
            return Err(ModelError::InvalidParameter {
                name: "pi0",
                value: pi0,
                reason: "must exceed (2^alpha - 1) / (2^(alpha+1) - 1) for a valid chain",
            });
        }
        Ok(Self { pi0, alpha })
    }

    /// Parameters with on-fraction `mu` and Hurst parameter `1 - alpha/2`.
    pub fn from_mean_and_hurst(mu: f64, hurst: f64) -> Result<Self, ModelError> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(ModelError::InvalidParameter { name: "hurst", value: hurst, reason: "must lie in (1/2, 1)" });
        }
        check_open_unit("mu", mu)?;
        Self::new(1.0 - mu, 2.0 * (1.0 - hurst))
    }

    /// Smallest excluded `pi0` for a given `alpha`.
    pub fn pi0_threshold(alpha: f64) -> f64 {
        (2f64.powf(alpha) - 1.0) / (2f64.powf(alpha + 1.0) - 1.0)
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hurst(&self) -> f64 {
        1.0 - self.alpha / 2.0
    }

    pub fn mean(&self) -> f64 {
        1.0 - self.pi0
    }

    fn c(&self) -> f64 {
        (1.0 - self.pi0) / self.pi0
    }

    /// `f_k`, the probability of jumping from state 0 to state `k`.
    pub fn jump_prob(&self, k: u64) -> f64 {
        let c = self.c();
        if k == 0 {
            return 1.0 - c * (1.0 - 2f64.powf(-self.alpha));
        }
        let k = k as f64;
        c * (first_difference(self.alpha, k) - first_difference(self.alpha, k + 1.0))
    }

    /// `P(J >= k)` for the jump out of state 0.
    pub fn jump_tail(&self, k: u64) -> f64 {
        self.ln_tail(k).exp()
    }

    /// Stationary probability of state `k`: `pi_0`, then
    /// `(1 - pi0) [k^-alpha - (k+1)^-alpha]`.
    pub fn equilibrium(&self, k: u64) -> f64 {
        if k == 0 {
            self.pi0
        } else {
            (1.0 - self.pi0) * first_difference(self.alpha, k as f64)
        }
    }

    /// `sum_{i >= k} pi_i = (1 - pi0) k^-alpha` for `k >= 1`.
    pub fn equilibrium_tail(&self, k: u64) -> Result<f64, ModelError> {
        if k == 0 {
            return Err(ModelError::StateOutOfRange(k));
        }
        Ok((1.0 - self.pi0) * (k as f64).powf(-self.alpha))
    }
}

impl TailLaw for CleggDodsonParams {
    fn ln_tail(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let k = k as f64;
        self.c().ln() - self.alpha * k.ln() + (-(-self.alpha * (1.0 / k).ln_1p()).exp_m1()).ln()
    }
}

impl OnOffChain for CleggDodsonParams {
    fn next_state<R: Rng + ?Sized>(&self, state: u64, rng: &mut R) -> u64 {
        if state > 0 {
            state - 1
        } else {
            sample(self, rng)
        }
    }

    fn transition_prob(&self, from: u64, to: u64) -> f64 {
        match from {
            0 => self.jump_prob(to),
            _ => f64::from(u8::from(to + 1 == from)),
        }
    }

    fn equilibrium(&self, state: u64) -> f64 {
        CleggDodsonParams::equilibrium(self, state)
    }

    fn is_on(&self, state: u64) -> bool {
        state != 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jump_probabilities() {
        let p = CleggDodsonParams::new(0.906, 0.4).unwrap();
        assert!((p.jump_prob(0) - 0.97488).abs() < 1e-5, "{}", p.jump_prob(0));
        assert!((p.jump_prob(1) - 0.013350).abs() < 1e-6, "{}", p.jump_prob(1));
        let direct = (0.094 / 0.906) * (1.0 - 2.0 * 2f64.powf(-0.4) + 3f64.powf(-0.4));
        assert!((p.jump_prob(1) - direct).abs() < 1e-15);
    }

    #[test]
    fn validity_threshold() {
        let t = CleggDodsonParams::pi0_threshold(0.4);
        assert!((t - 0.19494).abs() < 1e-5, "{t}");
        assert!(CleggDodsonParams::new(t, 0.4).is_err());
        let p = CleggDodsonParams::new(t + 1e-9, 0.4).unwrap();
        assert!(p.jump_prob(0) >= 0.0);
    }

    #[test]
    fn equilibrium_tail_matches_state_sums() {
        let p = CleggDodsonParams::new(0.9, 0.5).unwrap();
        assert!((p.equilibrium_tail(1).unwrap() - 0.1).abs() < 1e-15);
        assert!((p.equilibrium_tail(2).unwrap() - 0.070711).abs() < 1e-6);
        let n = 1_000_000u64;
        let partial: f64 = (2..n).rev().map(|k| p.equilibrium(k)).sum();
        let expected = p.equilibrium_tail(2).unwrap() - p.equilibrium_tail(n).unwrap();
        assert!((partial - expected).abs() < 1e-12);
        assert!(p.equilibrium_tail(0).is_err());
    }

    #[test]
    fn tail_law_is_consistent_with_jump_probs() {
        let p = CleggDodsonParams::new(0.7, 0.3).unwrap();
        for k in 1..50u64 {
            let diff = p.jump_tail(k) - p.jump_tail(k + 1);
            assert!((diff - p.jump_prob(k)).abs() < 1e-14, "k={k}");
        }
        assert!((p.jump_tail(1) - (1.0 - p.jump_prob(0))).abs() < 1e-15);
    }
}
