use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use statrs::distribution::{ContinuousCDF, Normal};

use super::series::BinarySeries;
use super::{check_open_unit, ModelError};

/// Longest series [`fgn`] will synthesise.
pub const MAX_FGN_LEN: usize = 1 << 24;

/// Fractional Gaussian noise thresholded into an on/off series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgnParams {
    hurst: f64,
    mu: f64,
}

impl FgnParams {
    pub fn new(hurst: f64, mu: f64) -> Result<Self, ModelError> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(ModelError::InvalidParameter { name: "hurst", value: hurst, reason: "must lie in (1/2, 1)" });
        }
        check_open_unit("mu", mu)?;
        Ok(Self { hurst, mu })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Standard-normal `(1 - mu)` quantile; slots above it are on.
    pub fn threshold(&self) -> f64 {
        Normal::standard().inverse_cdf(1.0 - self.mu)
    }

    pub(crate) fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<BinarySeries, ModelError> {
        let t = self.threshold();
        let x = fgn(self.hurst, n, rng)?;
        Ok(BinarySeries::from_bools(x.into_iter().map(|v| v > t)))
    }
}

/// `gamma(k) = ((k+1)^2H - 2 k^2H + (k-1)^2H) / 2`, unit variance.
pub fn fgn_autocovariance(hurst: f64, k: u64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// `n` samples of unit-variance fractional Gaussian noise with Hurst
/// parameter `hurst`, by circulant embedding.
///
/// The autocovariance is embedded in a circulant of size `2m`, `m` the
/// next power of two at or above `n`; its eigenvalues are the FFT of the
/// first row. Complex Gaussian weights scaled by `sqrt(lambda / 2m)` are
/// transformed back and the real part of the first `n` values returned.
/// The covariance of the result is exact.
pub fn fgn<R: Rng + ?Sized>(hurst: f64, n: usize, rng: &mut R) -> Result<Vec<f64>, ModelError> {
    if n == 0 || n > MAX_FGN_LEN {
        return Err(ModelError::UnsupportedLength(n));
    }
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(ModelError::InvalidParameter { name: "hurst", value: hurst, reason: "must lie in (0, 1)" });
    }
    let m = n.next_power_of_two();
    let size = 2 * m;
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(size);
    for k in 0..=m {
        row.push(Complex::new(fgn_autocovariance(hurst, k as u64), 0.0));
    }
    for k in (1..m).rev() {
        row.push(row[k]);
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(size);
    fft.process(&mut row);
    let scale = 1.0 / size as f64;
    let mut w: Vec<Complex<f64>> = row
        .iter()
        .map(|lambda| {
            // eigenvalues are non-negative up to rounding
            let amp = (lambda.re.max(0.0) * scale).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(amp * re, amp * im)
        })
        .collect();
    fft.process(&mut w);
    Ok(w.into_iter().take(n).map(|z| z.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn autocovariance_at_zero_and_one() {
        assert_eq!(fgn_autocovariance(0.8, 0), 1.0);
        assert!((fgn_autocovariance(0.8, 1) - (2f64.powf(1.6) / 2.0 - 1.0)).abs() < 1e-15);
        assert!(fgn_autocovariance(0.5, 3).abs() < 1e-15);
    }

    #[test]
    fn sample_covariance_matches() {
        let h = 0.8;
        let n = 1 << 16;
        let reps = 8;
        let mut acc = [0.0; 4];
        for r in 0..reps {
            let x = fgn(h, n, &mut seeded(r)).unwrap();
            for (lag, slot) in acc.iter_mut().enumerate() {
                *slot += x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum::<f64>() / (n - lag) as f64;
            }
        }
        for (lag, total) in acc.iter().enumerate() {
            let got = total / reps as f64;
            let want = fgn_autocovariance(h, lag as u64);
            assert!((got - want).abs() < 0.05, "lag {lag}: {got} vs {want}");
        }
    }

    #[test]
    fn threshold_preserves_mean() {
        let p = FgnParams::new(0.8, 0.5).unwrap();
        assert!(p.threshold().abs() < 1e-12);
        let q = FgnParams::new(0.8, 0.094).unwrap();
        let s = q.generate(1 << 18, &mut seeded(2)).unwrap();
        assert!((s.mean() - 0.094).abs() < 0.03);
    }

    #[test]
    fn rejects_lengths() {
        assert!(fgn(0.7, 0, &mut seeded(0)).is_err());
        assert!(fgn(0.7, MAX_FGN_LEN + 1, &mut seeded(0)).is_err());
    }
}
