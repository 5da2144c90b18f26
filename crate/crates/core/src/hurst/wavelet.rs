/// Daubechies D4 scaling filter (two vanishing moments).
fn d4() -> ([f64; 4], [f64; 4]) {
    let s3 = 3f64.sqrt();
    let norm = 4.0 * 2f64.sqrt();
    let h = [(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm, (1.0 - s3) / norm];
    let g = [h[3], -h[2], h[1], -h[0]];
    (h, g)
}

/// Detail coefficients of a periodic D4 transform, finest octave first.
/// Only the first `2^J` samples are used, `J = floor(log2 len)`.
pub fn detail_octaves(x: &[f64]) -> Vec<Vec<f64>> {
    let (h, g) = d4();
    let j_max = usize::BITS - 1 - x.len().leading_zeros();
    let mut approx: Vec<f64> = x[..1usize << j_max].to_vec();
    let mut out = Vec::new();
    while approx.len() >= 4 {
        let n = approx.len();
        let half = n / 2;
        let mut a = Vec::with_capacity(half);
        let mut d = Vec::with_capacity(half);
        for k in 0..half {
            let mut sa = 0.0;
            let mut sd = 0.0;
            for m in 0..4 {
                let v = approx[(2 * k + m) % n];
                sa += h[m] * v;
                sd += g[m] * v;
            }
            a.push(sa);
            d.push(sd);
        }
        out.push(d);
        approx = a;
    }
    out
}
