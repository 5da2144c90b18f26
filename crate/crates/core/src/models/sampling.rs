//! Drawing from heavy-tailed laws on the non-negative integers.
//!
//! Inverting a CDF with one uniform breaks down once `P(X >= k)` drops below
//! the resolution of the uniform: long excursions are never produced, or
//! produced with the wrong frequency. [`sample`] instead asks a sequence of
//! conditional questions whose answers all have probabilities of order one:
//!
//! 1. For small `k` the tail `P(X >= k)` is compared with a single uniform.
//! 2. Once `X >= k` is known, `P(X >= 2k | X >= k)` decides whether to keep
//!    doubling.
//! 3. When `X` is known to lie in `[lo, hi)` the range is halved with
//!    `P(X >= mid | lo <= X < hi)` until one value remains.
//!
//! Laws are described by their log tail, so ratios of tiny tails never
//! underflow.

use rand::Rng;

/// A law on `0, 1, 2, ...` given by `ln P(X >= k)`.
pub trait TailLaw {
    /// `ln P(X >= k)`; must be `0.0` at `k = 0`, non-increasing, and
    /// `-inf` beyond the support.
    fn ln_tail(&self, k: u64) -> f64;
}

/// Tails above this are compared directly with a uniform.
const DIRECT_FLOOR: f64 = 1.0 / (1u64 << 30) as f64;
const DIRECT_STEPS: u64 = 16;
/// Draws that would exceed this are clamped to it.
pub const SATURATION: u64 = 1 << 62;

pub fn sample<L: TailLaw + ?Sized, R: Rng + ?Sized>(law: &L, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    // X >= k holds on entry to each iteration.
    loop {
        if k >= DIRECT_STEPS {
            break;
        }
        let next = law.ln_tail(k + 1).exp();
        if u >= next {
            return k;
        }
        if next < DIRECT_FLOOR {
            k += 1;
            break;
        }
        k += 1;
    }
    let mut lo = k.max(1);
    loop {
        if lo >= SATURATION {
            return SATURATION;
        }
        let hi = lo * 2;
        let step = law.ln_tail(hi) - law.ln_tail(lo);
        if rng.random::<f64>() < step.exp() {
            lo = hi;
            continue;
        }
        return bisect(law, lo, hi, rng);
    }
}

/// Draw X conditioned on `lo <= X < hi`.
fn bisect<L: TailLaw + ?Sized, R: Rng + ?Sized>(law: &L, mut lo: u64, mut hi: u64, rng: &mut R) -> u64 {
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let base = law.ln_tail(lo);
        let to_mid = law.ln_tail(mid) - base;
        let to_hi = law.ln_tail(hi) - base;
        if rng.random::<f64>() < upper_share(to_mid, to_hi) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `(e^m - e^h) / (1 - e^h)` for `h <= m <= 0`, without cancellation.
fn upper_share(m: f64, h: f64) -> f64 {
    if m == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return m.exp();
    }
    let denom = -h.exp_m1();
    if denom <= 0.0 {
        // flat tail over [lo, hi): split evenly
        return 0.5;
    }
    (h.exp() * (m - h).exp_m1() / denom).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    struct Geometric(f64);
    impl TailLaw for Geometric {
        fn ln_tail(&self, k: u64) -> f64 {
            k as f64 * self.0.ln()
        }
    }

    struct PowerLaw(f64);
    impl TailLaw for PowerLaw {
        fn ln_tail(&self, k: u64) -> f64 {
            if k == 0 {
                0.0
            } else {
                -self.0 * (k as f64).ln()
            }
        }
    }

    struct Finite(Vec<f64>);
    impl TailLaw for Finite {
        fn ln_tail(&self, k: u64) -> f64 {
            let s: f64 = self.0.iter().skip(k as usize).sum();
            if s > 0.0 {
                s.ln()
            } else {
                f64::NEG_INFINITY
            }
        }
    }

    fn empirical_tail(draws: &[u64], k: u64) -> f64 {
        draws.iter().filter(|&&x| x >= k).count() as f64 / draws.len() as f64
    }

    #[test]
    fn power_law_tail_matches_across_octaves() {
        let law = PowerLaw(1.2);
        let mut rng = seeded(11);
        let n = 400_000;
        let draws: Vec<u64> = (0..n).map(|_| sample(&law, &mut rng)).collect();
        for &k in &[1u64, 2, 5, 17, 40, 100, 1000, 5000] {
            let p = law.ln_tail(k).exp();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let got = empirical_tail(&draws, k);
            assert!((got - p).abs() < 4.0 * se + 1e-12, "k={k}: {got} vs {p}");
        }
    }

    #[test]
    fn geometric_point_masses() {
        let law = Geometric(0.3);
        let mut rng = seeded(3);
        let n = 200_000;
        let draws: Vec<u64> = (0..n).map(|_| sample(&law, &mut rng)).collect();
        for k in 0..6u64 {
            let p = 0.3f64.powi(k as i32) * 0.7;
            let got = draws.iter().filter(|&&x| x == k).count() as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((got - p).abs() < 4.0 * se, "k={k}");
        }
    }

    #[test]
    fn finite_support_is_respected() {
        let mut masses = vec![0.0; 38];
        masses[1] = 0.25;
        masses[37] = 0.75;
        let law = Finite(masses);
        let mut rng = seeded(5);
        for _ in 0..10_000 {
            let x = sample(&law, &mut rng);
            assert!(x == 1 || x == 37, "{x}");
        }
    }

    #[test]
    fn upper_share_limits() {
        assert_eq!(upper_share(f64::NEG_INFINITY, f64::NEG_INFINITY), 0.0);
        assert!((upper_share(-0.5, f64::NEG_INFINITY) - (-0.5f64).exp()).abs() < 1e-15);
        // T(lo) = 1, T(mid) = 0.75, T(hi) = 0.5
        assert!((upper_share(0.75f64.ln(), 0.5f64.ln()) - 0.5).abs() < 1e-12);
    }
}
