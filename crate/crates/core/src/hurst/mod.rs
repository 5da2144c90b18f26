//! Hurst-parameter estimation from binned traffic counts.
//!
//! Five estimators, each standardising the series (mean 0, variance 1)
//! before it starts, so multiplying the counts by a positive constant or
//! adding a constant leaves every estimate unchanged:
//!
//! | method | statistic | fit | `H` from slope `s` |
//! |---|---|---|---|
//! | R/S | mean rescaled range over blocks of size `m` | `log R/S` on `log m`, `m >= 100` | `s` |
//! | aggregated variance | variance of `m`-block means | `log var` on `log m`, `m` in `[10, n/10]` | `1 + s/2` |
//! | periodogram | `I(lambda)` | `log I` on `log lambda`, lowest 10% | `(1 - s)/2` |
//! | wavelet | D4 detail energy per octave | `log2` energy on octave, weighted | `(1 + s)/2` |
//! | local Whittle | Gaussian semiparametric likelihood, `m = n^0.65` | golden section | minimiser |

mod regression;
mod wavelet;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use statrs::function::gamma::digamma;

use crate::trace::PacketTrace;

pub use regression::{fit_line, fit_line_weighted, log_spaced, LineFit};
pub use wavelet::detail_octaves;

/// Shortest series any estimator accepts.
pub const MIN_LEN: usize = 256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HurstError {
    #[error("series has {0} values; at least {MIN_LEN} are needed")]
    TooShort(usize),
    #[error("series has zero variance")]
    Constant,
    #[error("series contains a non-finite value")]
    NonFinite,
    #[error("bin width must be positive and finite, got {0}")]
    BinWidth(f64),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("too few points to fit ({0})")]
    TooFewPoints(usize),
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HurstMethod {
    RescaledRange,
    AggregatedVariance,
    Periodogram,
    Wavelet,
    LocalWhittle,
}

impl HurstMethod {
    pub const ALL: [HurstMethod; 5] = [
        HurstMethod::RescaledRange,
        HurstMethod::AggregatedVariance,
        HurstMethod::Periodogram,
        HurstMethod::Wavelet,
        HurstMethod::LocalWhittle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HurstMethod::RescaledRange => "rs",
            HurstMethod::AggregatedVariance => "aggvar",
            HurstMethod::Periodogram => "periodogram",
            HurstMethod::Wavelet => "wavelet",
            HurstMethod::LocalWhittle => "local-whittle",
        }
    }
}

impl fmt::Display for HurstMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HurstMethod {
    type Err = HurstError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HurstMethod::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| HurstError::UnknownMethod(s.to_string()))
    }
}

/// Fit ranges and tuning for the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstConfig {
    /// Smallest R/S block.
    pub rs_min_block: usize,
    /// Smallest R/S block used in the fit.
    pub rs_fit_min: usize,
    /// Blocks per R/S size, at least.
    pub rs_min_blocks: usize,
    pub aggvar_min_block: usize,
    /// Largest aggregation level is `n / aggvar_max_divisor`.
    pub aggvar_max_divisor: usize,
    /// Fraction of the Fourier frequencies used by the periodogram fit.
    pub periodogram_fraction: f64,
    /// Finest octave in the wavelet fit (1 is the finest available).
    pub wavelet_min_octave: usize,
    /// The coarsest octave fitted is `log2 n - wavelet_coarse_drop`.
    pub wavelet_coarse_drop: usize,
    /// Local Whittle bandwidth `m = n^whittle_exponent`.
    pub whittle_exponent: f64,
    pub whittle_tolerance: f64,
    /// Sizes per doubling for log-spaced block grids.
    pub per_octave: usize,
}

impl Default for HurstConfig {
    fn default() -> Self {
        Self {
            rs_min_block: 10,
            rs_fit_min: 100,
            rs_min_blocks: 10,
            aggvar_min_block: 10,
            aggvar_max_divisor: 10,
            periodogram_fraction: 0.1,
            wavelet_min_octave: 3,
            wavelet_coarse_drop: 4,
            whittle_exponent: 0.65,
            whittle_tolerance: 1e-6,
            per_octave: 4,
        }
    }
}

/// One estimate with the fit that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct HurstEstimate {
    pub method: HurstMethod,
    pub h: f64,
    /// Lower end of the fit range: block size, frequency or octave.
    pub fit_lo: f64,
    pub fit_hi: f64,
    /// Regression slope; for local Whittle, the implied spectral slope
    /// `1 - 2H`.
    pub slope: f64,
    /// RMS regression residual; for local Whittle, the objective at the
    /// minimum.
    pub residual: f64,
    /// Number of points in the fit.
    pub points: usize,
}

/// Counts per bin of a packet trace.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSeries {
    pub counts: Vec<f64>,
    pub bin_width: f64,
}

/// What each bin adds up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinUnit {
    #[default]
    Bits,
    Packets,
}

/// Bin `i` holds the packets arriving in `[i w, (i+1) w)`; there are
/// `ceil(span / w)` bins, or more if the last arrival needs them.
///
/// ```
/// use onoff::hurst::{bin_series, BinUnit};
/// use onoff::trace::{Packet, PacketTrace};
///
/// let t = PacketTrace::new(vec![Packet::new(0.005, 100), Packet::new(0.015, 100)])
///     .unwrap()
///     .with_duration(0.02)
///     .unwrap();
/// let b = bin_series(&t, 0.01, BinUnit::Bits).unwrap();
/// assert_eq!(b.counts, vec![100.0, 100.0]);
/// ```
pub fn bin_series(trace: &PacketTrace, bin_width: f64, unit: BinUnit) -> Result<BinnedSeries, HurstError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(HurstError::BinWidth(bin_width));
    }
    if trace.is_empty() {
        return Err(HurstError::EmptyTrace);
    }
    let index = |t: f64| (t / bin_width + 1e-9).floor() as usize;
    let by_span = (trace.span() / bin_width - 1e-9).ceil().max(0.0) as usize;
    let n = by_span.max(index(trace.last_arrival()) + 1);
    let mut counts = vec![0.0; n];
    for p in trace.records() {
        counts[index(p.time)] += match unit {
            BinUnit::Bits => p.bits as f64,
            BinUnit::Packets => 1.0,
        };
    }
    Ok(BinnedSeries { counts, bin_width })
}

fn standardise(x: &[f64]) -> Result<Vec<f64>, HurstError> {
    if x.len() < MIN_LEN {
        return Err(HurstError::TooShort(x.len()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(HurstError::NonFinite);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if !(sd > 0.0) || sd <= 1e-12 * mean.abs() {
        return Err(HurstError::Constant);
    }
    Ok(x.iter().map(|v| (v - mean) / sd).collect())
}

/// Estimates `H` for a binned series.
pub fn estimate(series: &BinnedSeries, method: HurstMethod) -> Result<HurstEstimate, HurstError> {
    estimate_values(&series.counts, method, &HurstConfig::default())
}

/// Estimates `H` for any real series.
pub fn estimate_values(x: &[f64], method: HurstMethod, cfg: &HurstConfig) -> Result<HurstEstimate, HurstError> {
    let z = standardise(x)?;
    match method {
        HurstMethod::RescaledRange => rescaled_range(&z, cfg),
        HurstMethod::AggregatedVariance => aggregated_variance(&z, cfg),
        HurstMethod::Periodogram => periodogram(&z, cfg),
        HurstMethod::Wavelet => wavelet(&z, cfg),
        HurstMethod::LocalWhittle => local_whittle(&z, cfg),
    }
}

/// All five estimates, with per-method failures kept apart.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HurstReport {
    pub estimates: BTreeMap<HurstMethod, HurstEstimate>,
    pub failures: BTreeMap<HurstMethod, HurstError>,
}

pub fn estimate_all(series: &BinnedSeries) -> HurstReport {
    estimate_all_values(&series.counts, &HurstConfig::default())
}

pub fn estimate_all_values(x: &[f64], cfg: &HurstConfig) -> HurstReport {
    let results: Vec<(HurstMethod, Result<HurstEstimate, HurstError>)> =
        HurstMethod::ALL.par_iter().map(|&m| (m, estimate_values(x, m, cfg))).collect();
    let mut report = HurstReport::default();
    for (m, r) in results {
        match r {
            Ok(e) => {
                report.estimates.insert(m, e);
            }
            Err(e) => {
                report.failures.insert(m, e);
            }
        }
    }
    report
}

fn rescaled_range(z: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, HurstError> {
    let n = z.len();
    let sizes = log_spaced(cfg.rs_min_block.max(2), n / cfg.rs_min_blocks.max(1), cfg.per_octave);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &m in &sizes {
        let mut sum = 0.0;
        let mut used = 0usize;
        for block in z.chunks_exact(m) {
            let mean = block.iter().sum::<f64>() / m as f64;
            let mut y = 0.0f64;
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            let mut ss = 0.0;
            for v in block {
                let d = v - mean;
                y += d;
                lo = lo.min(y);
                hi = hi.max(y);
                ss += d * d;
            }
            let s = (ss / m as f64).sqrt();
            if s > 0.0 {
                sum += (hi - lo) / s;
                used += 1;
            }
        }
        if used > 0 {
            pts.push((m as f64, sum / used as f64));
        }
    }
    let mut fit_pts: Vec<(f64, f64)> = pts.iter().copied().filter(|(m, _)| *m >= cfg.rs_fit_min as f64).collect();
    if fit_pts.len() < 3 {
        fit_pts = pts;
    }
    log_log_fit(HurstMethod::RescaledRange, &fit_pts, |s| s)
}

fn aggregated_variance(z: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, HurstError> {
    let n = z.len();
    let sizes = log_spaced(cfg.aggvar_min_block.max(1), n / cfg.aggvar_max_divisor.max(1), cfg.per_octave);
    let mut pts = Vec::new();
    for &m in &sizes {
        let means: Vec<f64> = z.chunks_exact(m).map(|c| c.iter().sum::<f64>() / m as f64).collect();
        let k = means.len() as f64;
        let mu = means.iter().sum::<f64>() / k;
        let var = means.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (k - 1.0);
        if var > 0.0 {
            pts.push((m as f64, var));
        }
    }
    log_log_fit(HurstMethod::AggregatedVariance, &pts, |s| 1.0 + s / 2.0)
}

fn log_log_fit(method: HurstMethod, pts: &[(f64, f64)], to_h: impl Fn(f64) -> f64) -> Result<HurstEstimate, HurstError> {
    if pts.len() < 2 {
        return Err(HurstError::TooFewPoints(pts.len()));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let f = fit_line(&x, &y).ok_or(HurstError::TooFewPoints(pts.len()))?;
    Ok(HurstEstimate {
        method,
        h: to_h(f.slope),
        fit_lo: pts[0].0,
        fit_hi: pts[pts.len() - 1].0,
        slope: f.slope,
        residual: f.residual,
        points: pts.len(),
    })
}

/// `I(lambda_j) = |sum_t x_t e^{-i lambda_j t}|^2 / (2 pi n)` for
/// `lambda_j = 2 pi j / n`, `j = 1..=n/2`.
fn periodogram_values(z: &[f64]) -> Vec<(f64, f64)> {
    let n = z.len();
    let mut buf: Vec<Complex<f64>> = z.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (2.0 * std::f64::consts::PI * n as f64);
    (1..=n / 2)
        .map(|j| (2.0 * std::f64::consts::PI * j as f64 / n as f64, buf[j].norm_sqr() * scale))
        .collect()
}

fn periodogram(z: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, HurstError> {
    let all = periodogram_values(z);
    let m = ((all.len() as f64 * cfg.periodogram_fraction).floor() as usize).max(2).min(all.len());
    let pts: Vec<(f64, f64)> = all[..m].iter().copied().filter(|p| p.1 > 0.0).collect();
    log_log_fit(HurstMethod::Periodogram, &pts, |s| (1.0 - s) / 2.0)
}

fn wavelet(z: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, HurstError> {
    let octaves = detail_octaves(z);
    let j_total = octaves.len() + 1;
    let lo = cfg.wavelet_min_octave.max(1);
    let hi = j_total.saturating_sub(cfg.wavelet_coarse_drop).min(octaves.len());
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for j in lo..=hi {
        let d = &octaves[j - 1];
        let nj = d.len() as f64;
        let energy = d.iter().map(|v| v * v).sum::<f64>() / nj;
        if energy <= 0.0 {
            continue;
        }
        // E[log2 of a mean of nj chi-square(1)/nj variables] offset
        let bias = digamma(nj / 2.0) / std::f64::consts::LN_2 - (nj / 2.0).log2();
        x.push(j as f64);
        y.push(energy.log2() - bias);
        w.push(nj);
    }
    if x.len() < 2 {
        return Err(HurstError::TooFewPoints(x.len()));
    }
    let f = fit_line_weighted(&x, &y, &w).ok_or(HurstError::TooFewPoints(x.len()))?;
    Ok(HurstEstimate {
        method: HurstMethod::Wavelet,
        h: (1.0 + f.slope) / 2.0,
        fit_lo: x[0],
        fit_hi: x[x.len() - 1],
        slope: f.slope,
        residual: f.residual,
        points: x.len(),
    })
}

fn local_whittle(z: &[f64], cfg: &HurstConfig) -> Result<HurstEstimate, HurstError> {
    let all = periodogram_values(z);
    let m = ((z.len() as f64).powf(cfg.whittle_exponent).floor() as usize).min(all.len());
    if m < 2 {
        return Err(HurstError::TooFewPoints(m));
    }
    let pts = &all[..m];
    let mean_log_lambda = pts.iter().map(|p| p.0.ln()).sum::<f64>() / m as f64;
    let objective = |h: f64| {
        let e = 2.0 * h - 1.0;
        let g = pts.iter().map(|(l, i)| l.powf(e) * i).sum::<f64>() / m as f64;
        g.ln() - e * mean_log_lambda
    };
    let h = golden_section(objective, 1e-6, 1.0 - 1e-6, cfg.whittle_tolerance);
    Ok(HurstEstimate {
        method: HurstMethod::LocalWhittle,
        h,
        fit_lo: pts[0].0,
        fit_hi: pts[m - 1].0,
        slope: 1.0 - 2.0 * h,
        residual: objective(h),
        points: m,
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// One line of a Hurst table.
#[derive(Debug, Clone, PartialEq)]
pub struct HurstRow {
    pub input: String,
    pub bin_width: f64,
    pub method: HurstMethod,
    pub result: Result<HurstEstimate, HurstError>,
}

/// Rows for every method of `report`, failures included.
pub fn report_rows(input: &str, bin_width: f64, report: &HurstReport) -> Vec<HurstRow> {
    HurstMethod::ALL
        .iter()
        .filter_map(|m| {
            let result = match (report.estimates.get(m), report.failures.get(m)) {
                (Some(e), _) => Ok(e.clone()),
                (None, Some(err)) => Err(err.clone()),
                (None, None) => return None,
            };
            Some(HurstRow { input: input.to_string(), bin_width, method: *m, result })
        })
        .collect()
}

/// Columns `input, bin_width_s, method, h, fit_lo, fit_hi, slope, residual,
/// note`; failed methods leave the numbers empty and explain in `note`.
pub fn write_hurst_csv<W: Write>(rows: &[HurstRow], out: W) -> Result<(), HurstError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| HurstError::Csv(e.to_string());
    w.write_record(["input", "bin_width_s", "method", "h", "fit_lo", "fit_hi", "slope", "residual", "note"])
        .map_err(err)?;
    for r in rows {
        let mut rec = vec![r.input.clone(), r.bin_width.to_string(), r.method.name().to_string()];
        match &r.result {
            Ok(e) => {
                rec.extend([e.h, e.fit_lo, e.fit_hi, e.slope, e.residual].map(|v| v.to_string()));
                rec.push(String::new());
            }
            Err(e) => {
                rec.extend(std::iter::repeat_n(String::new(), 5));
                rec.push(e.to_string());
            }
        }
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| HurstError::Csv(e.to_string()))
}
