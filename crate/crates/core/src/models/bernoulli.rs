use rand::Rng;

use super::series::BinarySeries;
use super::ModelError;

/// Independent slots, each on with probability `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliParams {
    mu: f64,
}

impl BernoulliParams {
    /// `mu` may be 0 or 1, giving a constant series.
    pub fn new(mu: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(ModelError::InvalidParameter { name: "mu", value: mu, reason: "must lie in [0, 1]" });
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub(crate) fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> BinarySeries {
        BinarySeries::from_bits_unchecked((0..n).map(|_| u8::from(rng.random::<f64>() < self.mu)).collect())
    }
}
