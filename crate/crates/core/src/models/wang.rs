use rand::Rng;

use super::sampling::{sample, TailLaw};
use super::zeta::zeta;
use super::{check_open_unit, ModelError, OnOffChain};

/// The Wang model: a companion-matrix chain whose jumps out of state 0 have
/// a power-law tail `P(J >= k) = a k^-(alpha+1)`.
///
/// From state 0 the chain jumps to `k` with probability `f_k`; from `k > 0`
/// it steps down to `k - 1`. With `f_0 = 1 - a` and
/// `f_k = a k^-(alpha+1) - a (k+1)^-(alpha+1)`, on-runs have a tail of index
/// `alpha + 1` and the on/off series has Hurst parameter `1 - alpha/2` when
/// `alpha` lies in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WangParams {
    a: f64,
    alpha: f64,
}

impl WangParams {
    pub fn new(a: f64, alpha: f64) -> Result<Self, ModelError> {
        check_open_unit("a", a)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ModelError::InvalidParameter { name: "alpha", value: alpha, reason: "must be positive" });
        }
        Ok(Self { a, alpha })
    }

    /// Parameters with mean `mu` and Hurst parameter `hurst` in (1/2, 1).
    pub fn from_mean_and_hurst(mu: f64, hurst: f64) -> Result<Self, ModelError> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(ModelError::InvalidParameter { name: "hurst", value: hurst, reason: "must lie in (1/2, 1)" });
        }
        let alpha = 2.0 * (1.0 - hurst);
        Self::new(wang_fit_a(mu, alpha)?, alpha)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hurst(&self) -> f64 {
        1.0 - self.alpha / 2.0
    }

    /// `f_k`, the probability of jumping from state 0 to state `k`.
    pub fn jump_prob(&self, k: u64) -> f64 {
        if k == 0 {
            return 1.0 - self.a;
        }
        let s = self.alpha + 1.0;
        let kf = k as f64;
        // k^-s - (k+1)^-s = k^-s (1 - (1 + 1/k)^-s)
        self.a * kf.powf(-s) * -(-s * (1.0 / kf).ln_1p()).exp_m1()
    }

    /// `1 - 1 / (1 + a zeta(alpha + 1))`.
    pub fn mean(&self) -> f64 {
        1.0 - 1.0 / (1.0 + self.a * zeta(self.alpha + 1.0))
    }

    /// `pi_0 = 1 - mu`, and `pi_k = pi_0 a k^-(alpha+1)` for `k >= 1`.
    pub fn equilibrium(&self, k: u64) -> f64 {
        let pi0 = 1.0 - self.mean();
        if k == 0 {
            pi0
        } else {
            pi0 * self.a * (k as f64).powf(-(self.alpha + 1.0))
        }
    }
}

/// The `a` giving mean `mu` for tail index `alpha`:
/// `a = mu / ((1 - mu) zeta(alpha + 1))`.
///
/// Fails when the result falls outside (0, 1).
///
/// ```
/// use onoff::models::{wang_fit_a, WangParams};
///
/// let a = wang_fit_a(0.094, 0.4).unwrap();
/// assert!((a - 0.03341).abs() < 1e-5);
/// assert!((WangParams::new(a, 0.4).unwrap().mean() - 0.094).abs() < 1e-12);
/// ```
pub fn wang_fit_a(mu: f64, alpha: f64) -> Result<f64, ModelError> {
    check_open_unit("mu", mu)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ModelError::InvalidParameter { name: "alpha", value: alpha, reason: "must be positive" });
    }
    let a = mu / ((1.0 - mu) * zeta(alpha + 1.0));
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(ModelError::Infeasible(format!("mean {mu} with alpha {alpha} needs a = {a}, outside (0, 1)")))
    }
}

impl TailLaw for WangParams {
    fn ln_tail(&self, k: u64) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.a.ln() - (self.alpha + 1.0) * (k as f64).ln()
        }
    }
}

impl OnOffChain for WangParams {
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
        WangParams::equilibrium(self, state)
    }

    fn is_on(&self, state: u64) -> bool {
        state != 0
    }
}
