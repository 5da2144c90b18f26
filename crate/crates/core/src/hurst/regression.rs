/// Weighted least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual, weighted like the fit.
    pub residual: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    fit_line_weighted(x, y, &vec![1.0; x.len()])
}

pub fn fit_line_weighted(x: &[f64], y: &[f64], w: &[f64]) -> Option<LineFit> {
    if x.len() != y.len() || x.len() != w.len() || x.len() < 2 {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = (0..x.len()).map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2)).sum();
    Some(LineFit { slope, intercept, residual: (ss / sw).sqrt() })
}

/// Distinct integers from `lo` to `hi` spaced roughly evenly in log scale,
/// `per_octave` to a doubling.
pub fn log_spaced(lo: usize, hi: usize, per_octave: usize) -> Vec<usize> {
    let mut out = Vec::new();
    if lo == 0 || hi < lo {
        return out;
    }
    let step = 2f64.powf(1.0 / per_octave as f64);
    let mut v = lo as f64;
    while v <= hi as f64 * (1.0 + 1e-12) {
        let k = v.round() as usize;
        if out.last() != Some(&k) && k <= hi {
            out.push(k);
        }
        v *= step;
    }
    out
}
