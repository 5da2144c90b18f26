use rand::Rng;

use super::sampling::{sample, TailLaw};
use super::series::{BinarySeries, Histogram};
use super::{check_open_unit, ModelError};

/// Largest run length a [`RunLengthLaw`] may put mass on.
pub const MAX_SUPPORT: usize = 1_000_000;

const SUM_TOLERANCE: f64 = 1e-12;

/// A distribution on `1, 2, ..., max_support` stored as a dense histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLengthLaw {
    /// `pmf[k - 1] = P(X = k)`
    pmf: Vec<f64>,
    /// `suffix[k - 1] = P(X >= k)`
    suffix: Vec<f64>,
    mean: f64,
}

impl RunLengthLaw {
    /// `pmf[k - 1]` is the probability of a run of length `k`. The masses
    /// must be non-negative and sum to 1 within `1e-12`.
    pub fn new(pmf: Vec<f64>) -> Result<Self, ModelError> {
        if pmf.is_empty() {
            return Err(ModelError::InvalidDistribution("no support".into()));
        }
        if pmf.len() > MAX_SUPPORT {
            return Err(ModelError::InvalidDistribution(format!(
                "support {} exceeds the maximum {MAX_SUPPORT}",
                pmf.len()
            )));
        }
        if let Some(bad) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(ModelError::InvalidDistribution(format!("mass {bad} is not a probability")));
        }
        let mut suffix = vec![0.0; pmf.len()];
        let mut acc = 0.0;
        let mut mean = 0.0;
        for k in (0..pmf.len()).rev() {
            acc += pmf[k];
            suffix[k] = acc;
            mean += pmf[k] * (k + 1) as f64;
        }
        if (acc - 1.0).abs() > SUM_TOLERANCE {
            return Err(ModelError::InvalidDistribution(format!("masses sum to {acc}, not 1")));
        }
        let mut pmf = pmf;
        while pmf.last() == Some(&0.0) {
            pmf.pop();
            suffix.pop();
        }
        Ok(Self { pmf, suffix, mean })
    }

    /// Normalises non-negative weights into a law.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, ModelError> {
        let total: f64 = weights.iter().rev().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(ModelError::InvalidDistribution(format!("weights sum to {total}")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// Normalised run-length counts.
    pub fn from_histogram(hist: &Histogram) -> Result<Self, ModelError> {
        let Some((&max, _)) = hist.last_key_value() else {
            return Err(ModelError::InvalidDistribution("empty histogram".into()));
        };
        if hist.contains_key(&0) {
            return Err(ModelError::InvalidDistribution("run length 0 in histogram".into()));
        }
        if max as usize > MAX_SUPPORT {
            return Err(ModelError::InvalidDistribution(format!("run length {max} exceeds {MAX_SUPPORT}")));
        }
        let mut weights = vec![0.0; max as usize];
        for (&k, &count) in hist {
            weights[k as usize - 1] = count as f64;
        }
        Self::from_weights(weights)
    }

    pub fn point_mass(k: u64) -> Result<Self, ModelError> {
        if k == 0 || k as usize > MAX_SUPPORT {
            return Err(ModelError::InvalidDistribution(format!("point mass at {k}")));
        }
        let mut pmf = vec![0.0; k as usize];
        pmf[k as usize - 1] = 1.0;
        Self::new(pmf)
    }

    /// Tail `P(X >= k)` proportional to `k^-(alpha+1)`, truncated at
    /// `max_support` and renormalised. For `alpha` in (0, 1) the runs have
    /// a finite mean and infinite variance.
    pub fn power_law(alpha: f64, max_support: usize) -> Result<Self, ModelError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ModelError::InvalidParameter { name: "alpha", value: alpha, reason: "must be positive" });
        }
        if max_support == 0 || max_support > MAX_SUPPORT {
            return Err(ModelError::InvalidDistribution(format!("support {max_support}")));
        }
        let s = alpha + 1.0;
        let weights = (1..=max_support)
            .map(|k| {
                let k = k as f64;
                k.powf(-s) * -(-s * (1.0 / k).ln_1p()).exp_m1()
            })
            .collect();
        Self::from_weights(weights)
    }

    pub fn pmf(&self, k: u64) -> f64 {
        match k {
            0 => 0.0,
            k => self.pmf.get(k as usize - 1).copied().unwrap_or(0.0),
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Largest length with positive mass.
    pub fn max_support(&self) -> u64 {
        self.pmf.len() as u64
    }
}

impl TailLaw for RunLengthLaw {
    fn ln_tail(&self, k: u64) -> f64 {
        match k {
            0 => 0.0,
            k => match self.suffix.get(k as usize - 1) {
                Some(&t) if t > 0.0 => t.ln().min(0.0),
                _ => f64::NEG_INFINITY,
            },
        }
    }
}

/// The Arrowsmith/Barenco model: off-runs drawn from `f_L`, on-runs from
/// `f_R`, alternating.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrowsmithBarencoParams {
    left: RunLengthLaw,
    right: RunLengthLaw,
}

impl ArrowsmithBarencoParams {
    /// `left` gives off-run lengths, `right` on-run lengths.
    pub fn new(left: RunLengthLaw, right: RunLengthLaw) -> Self {
        Self { left, right }
    }

    /// Fits the model to observed packet-train (on-run) and gap (off-run)
    /// length histograms.
    ///
    /// ```
    /// use onoff::models::{ArrowsmithBarencoParams, Histogram};
    ///
    /// let trains = Histogram::from([(1, 5), (3, 5)]);
    /// let gaps = Histogram::from([(1, 7)]);
    /// let p = ArrowsmithBarencoParams::fit_from_empirical(&trains, &gaps).unwrap();
    /// assert!((p.mean() - 2.0 / 3.0).abs() < 1e-12);
    /// ```
    pub fn fit_from_empirical(trains: &Histogram, gaps: &Histogram) -> Result<Self, ModelError> {
        if trains.values().all(|&c| c == 0) {
            return Err(ModelError::EmptyHistogram("train"));
        }
        if gaps.values().all(|&c| c == 0) {
            return Err(ModelError::EmptyHistogram("gap"));
        }
        Ok(Self::new(RunLengthLaw::from_histogram(gaps)?, RunLengthLaw::from_histogram(trains)?))
    }

    pub fn left(&self) -> &RunLengthLaw {
        &self.left
    }

    pub fn right(&self) -> &RunLengthLaw {
        &self.right
    }

    /// `S_R / (S_R + S_L)`.
    pub fn mean(&self) -> f64 {
        self.right.mean / (self.right.mean + self.left.mean)
    }

    pub(crate) fn generate<R: Rng + ?Sized>(&self, n: usize, warmup: u64, rng: &mut R) -> BinarySeries {
        let s_l = self.left.mean;
        let s_r = self.right.mean;
        let mut on = rng.random::<f64>() >= s_l / (s_l + s_r);
        let mut skip = warmup;
        let mut values = Vec::with_capacity(n);
        while values.len() < n {
            let law = if on { &self.right } else { &self.left };
            let mut run = sample(law, rng);
            let skipped = run.min(skip);
            run -= skipped;
            skip -= skipped;
            let take = (run as usize).min(n - values.len());
            values.resize(values.len() + take, u8::from(on));
            on = !on;
        }
        BinarySeries::from_bits_unchecked(values)
    }
}

/// Large-lag autocorrelation `rho(k) ~ K k^beta` of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfAsymptote {
    pub beta: f64,
    pub amplitude: f64,
}

/// `beta = min(alpha_l, alpha_r)` and the amplitude from the three-case rule
/// with `S = S_L + S_R`:
///
/// * `alpha_r < alpha_l`: `K_R (1 - mu) / (S (alpha_r - 1) mu)`
/// * `alpha_l < alpha_r`: `K_L mu / (S (alpha_l - 1) (1 - mu))`
/// * equal: `K_R (1 - mu) K_L mu / (mu (1 - mu) S (alpha_l - 1))`
///
/// The `(alpha - 1)` factors are negative on (0, 1), so the amplitude is
/// negative as written.
pub fn ab_acf_asymptote(
    alpha_l: f64,
    alpha_r: f64,
    k_l: f64,
    k_r: f64,
    mu: f64,
    s: f64,
) -> Result<AcfAsymptote, ModelError> {
    check_open_unit("alpha_l", alpha_l)?;
    check_open_unit("alpha_r", alpha_r)?;
    check_open_unit("mu", mu)?;
    for (name, value) in [("k_l", k_l), ("k_r", k_r), ("s", s)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ModelError::InvalidParameter { name, value, reason: "must be positive" });
        }
    }
    let amplitude = if alpha_r < alpha_l {
        k_r * (1.0 - mu) / (s * (alpha_r - 1.0) * mu)
    } else if alpha_l < alpha_r {
        k_l * mu / (s * (alpha_l - 1.0) * (1.0 - mu))
    } else {
        k_r * (1.0 - mu) * k_l * mu / (mu * (1.0 - mu) * s * (alpha_l - 1.0))
    };
    if !amplitude.is_finite() {
        return Err(ModelError::Infeasible(format!("amplitude {amplitude} is not finite")));
    }
    Ok(AcfAsymptote { beta: alpha_l.min(alpha_r), amplitude })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn point_masses() {
        let one = RunLengthLaw::point_mass(1).unwrap();
        let three = RunLengthLaw::point_mass(3).unwrap();
        assert_eq!(ArrowsmithBarencoParams::new(one.clone(), one.clone()).mean(), 0.5);
        let p = ArrowsmithBarencoParams::new(three, one);
        assert_eq!(p.mean(), 0.25);
        let s = p.generate(400, 0, &mut seeded(1));
        assert!(s.to_text().contains("0001000"));
        assert!((s.mean() - 0.25).abs() < 0.01);
    }

    #[test]
    fn rejects_unnormalised_mass() {
        assert!(RunLengthLaw::new(vec![0.5, 0.4]).is_err());
        assert!(RunLengthLaw::new(vec![0.5, -0.1, 0.6]).is_err());
        assert!(RunLengthLaw::new(vec![0.5, 0.5 + 1e-13]).is_ok());
    }

    #[test]
    fn fitting() {
        let two = Histogram::from([(2, 10)]);
        let p = ArrowsmithBarencoParams::fit_from_empirical(&two, &two).unwrap();
        assert_eq!(p.mean(), 0.5);
        assert!(matches!(
            ArrowsmithBarencoParams::fit_from_empirical(&Histogram::new(), &two),
            Err(ModelError::EmptyHistogram("train"))
        ));
    }

    #[test]
    fn asymptote_cases() {
        let a = ab_acf_asymptote(0.3, 0.7, 1.0, 1.0, 0.5, 4.0).unwrap();
        assert_eq!(a.beta, 0.3);
        let b = ab_acf_asymptote(0.6, 0.4, 2.0, 1.0, 0.5, 4.0).unwrap();
        assert_eq!(b.beta, 0.4);
        assert!((b.amplitude - 0.5 / (4.0 * -0.6 * 0.5)).abs() < 1e-15);
        let c = ab_acf_asymptote(0.5, 0.5, 2.0, 3.0, 0.25, 4.0).unwrap();
        assert!((c.amplitude - 6.0 / (4.0 * -0.5)).abs() < 1e-12);
    }

    #[test]
    fn power_law_tail() {
        let law = RunLengthLaw::power_law(0.5, 1000).unwrap();
        let ratio = law.ln_tail(10).exp() / law.ln_tail(20).exp();
        let cut = 1001f64.powf(-1.5);
        let expected = (10f64.powf(-1.5) - cut) / (20f64.powf(-1.5) - cut);
        assert!((ratio - expected).abs() < 1e-9, "{ratio} vs {expected}");
        assert_eq!(law.ln_tail(1), 0.0);
        assert_eq!(law.ln_tail(1001), f64::NEG_INFINITY);
    }
}
