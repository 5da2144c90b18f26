//! Exact first-return-time tails of the infinite and truncated PSST chains.
//!
//! For the chain of [`crate::models::PsstParams`] with `n` non-zero states,
//!
//! ```text
//! P(k) = sum_{i=1}^{n} a^-i Sigma_i^k,    Sigma_i = 1 - (q/a)^i.
//! ```
//!
//! Expanding `Sigma_i^k` binomially and summing the geometric series in `i`
//! gives an alternating sum with one term per `j = 0..=k`:
//!
//! ```text
//! P(k) = sum_j C(k, j) (-1)^j g_j,
//! g_j  = x_j (1 - x_j^n) / (1 - x_j),      x_j = (q/a)^j / a,
//! ```
//!
//! and for the infinite chain `g_j = 1 / (a (a/q)^j - 1)`. The terms nearly
//! cancel, so everything here is done in exact rational arithmetic. All the
//! `g_j` are put over one common denominator first; after that each tail is
//! a sum of big integers and a table of tails for `k = 0..=K` is a table of
//! forward differences.
//!
//! # Two conventions at `k = 0`
//!
//! `P(k)` as defined above is the chance that a return takes more than
//! `k + 1` steps: the jump out of state 0 uses one step before any
//! `Sigma_i` factor applies. So `P(0) = 1/(a-1)`, the chance of leaving 0
//! at all, whereas the first-return time `R_0` itself has
//! `P(R_0 > 0) = 1`. [`PsstTail::tail`] returns `P(k)`;
//! [`PsstTail::first_return_tail`] returns `P(R_0 > k) = P(k - 1)`.

mod exact;

use std::io::Write;
use std::ops::RangeInclusive;

use malachite::base::num::arithmetic::traits::{DivExact, Gcd, Lcm, Pow};
use malachite::{Integer, Natural, Rational};

pub use exact::{parse_exact, ExactProbability, EXPORT_DIGITS};

/// Largest `k` accepted by [`loglog_table`].
pub const MAX_TABLE_K: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TailError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("cannot parse {0:?} as an exact number")]
    Parse(String),
    #[error("{0}")]
    WrongChainLength(&'static str),
    #[error("k = {0} exceeds the table limit {MAX_TABLE_K}")]
    KTooLarge(u64),
    #[error("csv: {0}")]
    Csv(String),
}

/// Number of non-zero states in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainLength {
    Finite(u64),
    Infinite,
}

/// How a single tail is summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMethod {
    /// Paired form for odd `k`, plain alternating sum otherwise.
    Auto,
    /// `sum_j C(k, j) (-1)^j g_j` for every `k`.
    Alternating,
    /// Term by term over the states `i = 1..=n`; finite chains only.
    Direct,
}

/// Exact PSST return-tail evaluator for fixed `a` and `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsstTail {
    a: Rational,
    q: Rational,
    /// q/a = rho_n / rho_d in lowest terms
    rho_n: Natural,
    rho_d: Natural,
    /// a = a_n / a_d in lowest terms
    a_n: Natural,
    a_d: Natural,
}

/// All `g_j`, `j = 0..=k_max`, as `numerators[j] / denominator`.
struct CommonWeights {
    numerators: Vec<Integer>,
    denominator: Natural,
}

impl PsstTail {
    /// Requires `a > q > 1` and `a > 2`.
    pub fn new(a: Rational, q: Rational) -> Result<Self, TailError> {
        let one = Rational::from(1u32);
        let two = Rational::from(2u32);
        if q <= one || a <= q || a <= two {
            return Err(TailError::InvalidParameters(format!("need a > q > 1 and a > 2, got a = {a}, q = {q}")));
        }
        let (rho_n, rho_d) = (&q / &a).into_numerator_and_denominator();
        let (a_n, a_d) = a.to_numerator_and_denominator();
        Ok(Self { a, q, rho_n, rho_d, a_n, a_d })
    }

    /// Parses both parameters with [`parse_exact`].
    ///
    /// ```
    /// use onoff::psst_tail::{ChainLength, PsstTail};
    ///
    /// let tail = PsstTail::from_decimal("3", "2").unwrap();
    /// let p1 = tail.tail(ChainLength::Infinite, 1);
    /// assert_eq!(p1.to_rational().to_string(), "3/14");
    /// ```
    pub fn from_decimal(a: &str, q: &str) -> Result<Self, TailError> {
        Self::new(parse_exact(a)?, parse_exact(q)?)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    fn weights(&self, k_max: u64, n: ChainLength) -> CommonWeights {
        let len = k_max as usize + 1;
        // x_j = U_j / V_j with U_j = rho_n^j a_d, V_j = rho_d^j a_n
        let mut u = self.a_d.clone();
        let mut v = self.a_n.clone();
        let mut reduced = Vec::with_capacity(len);
        let mut lcm = Natural::from(1u32);
        for _ in 0..len {
            let d = &v - &u;
            let g = (&u).gcd(&d);
            let un = (&u).div_exact(&g);
            let dn = d.div_exact(&g);
            lcm = lcm.lcm(&dn);
            reduced.push((un, dn));
            u *= &self.rho_n;
            v *= &self.rho_d;
        }
        let mut numerators: Vec<Integer> =
            reduced.into_iter().map(|(un, dn)| Integer::from(un * (&lcm).div_exact(dn))).collect();
        let denominator = match n {
            ChainLength::Infinite => lcm,
            ChainLength::Finite(n) => {
                // 1 - x_j^n over the common denominator V_K^n; V_K / V_j = rho_d^(K-j)
                let v_k = (&self.rho_d).pow(k_max) * &self.a_n;
                let v_k_n = (&v_k).pow(n);
                let mut u_j = self.a_d.clone();
                for (j, num) in numerators.iter_mut().enumerate() {
                    let lift = (&self.rho_d).pow((k_max - j as u64) * n);
                    let factor = Integer::from(&v_k_n) - Integer::from((&u_j).pow(n) * lift);
                    *num *= factor;
                    u_j *= &self.rho_n;
                }
                lcm * v_k_n
            }
        };
        CommonWeights { numerators, denominator }
    }

    /// `P(k)` with the method chosen automatically.
    pub fn tail(&self, n: ChainLength, k: u64) -> ExactProbability {
        self.tail_with(n, k, TailMethod::Auto).expect("automatic method always applies")
    }

    pub fn tail_with(&self, n: ChainLength, k: u64, method: TailMethod) -> Result<ExactProbability, TailError> {
        match method {
            TailMethod::Direct => match n {
                ChainLength::Finite(n) => Ok(self.direct(n, k)),
                ChainLength::Infinite => Err(TailError::WrongChainLength("the direct sum needs a finite chain")),
            },
            TailMethod::Auto => {
                let w = self.weights(k, n);
                Ok(binomial_sum(&w, k, k % 2 == 1))
            }
            TailMethod::Alternating => {
                let w = self.weights(k, n);
                Ok(binomial_sum(&w, k, false))
            }
        }
    }

    /// `P(R_0 > k)`: 1 at `k = 0`, else `P(k - 1)`.
    pub fn first_return_tail(&self, n: ChainLength, k: u64) -> ExactProbability {
        match k {
            0 => ExactProbability::one(),
            k => self.tail(n, k - 1),
        }
    }

    /// `P(k)` for every `k` in `0..=k_max`.
    pub fn tails(&self, n: ChainLength, k_max: u64) -> Vec<ExactProbability> {
        let CommonWeights { numerators: mut row, denominator } = self.weights(k_max, n);
        // row holds the m-th forward differences; P(m) = (-Delta)^m g at j = 0
        let mut out = Vec::with_capacity(row.len());
        while !row.is_empty() {
            out.push(ExactProbability::new(row[0].clone(), denominator.clone()));
            for j in 0..row.len() - 1 {
                let (head, rest) = row.split_at_mut(j + 1);
                head[j] -= &rest[0];
            }
            row.pop();
        }
        out
    }

    /// `P(k)` for each `k` in `ks`, sharing one set of weights.
    pub fn tails_at(&self, n: ChainLength, ks: &[u64]) -> Vec<ExactProbability> {
        let Some(&k_max) = ks.iter().max() else { return Vec::new() };
        let w = self.weights(k_max, n);
        ks.iter().map(|&k| binomial_sum(&w, k, k % 2 == 1)).collect()
    }

    fn direct(&self, n: u64, k: u64) -> ExactProbability {
        // common denominator a_n^n rho_d^(n k)
        let mut total = Natural::from(0u32);
        for i in 1..=n {
            let rho_d_i = (&self.rho_d).pow(i);
            let stay = &rho_d_i - (&self.rho_n).pow(i);
            total += (&self.a_d).pow(i)
                * (&self.a_n).pow(n - i)
                * stay.pow(k)
                * (&self.rho_d).pow((n - i) * k);
        }
        let den = (&self.a_n).pow(n) * (&self.rho_d).pow(n * k);
        ExactProbability::new(Integer::from(total), den)
    }
}

fn binomial_sum(w: &CommonWeights, k: u64, paired: bool) -> ExactProbability {
    let g = &w.numerators;
    let mut total = Integer::from(0u32);
    let mut c = Natural::from(1u32);
    for j in 0..=k {
        if paired {
            // every even j pairs with the odd k - j
            if j % 2 == 0 {
                total += Integer::from(&c) * (&g[j as usize] - &g[(k - j) as usize]);
            }
        } else if j % 2 == 0 {
            total += Integer::from(&c) * &g[j as usize];
        } else {
            total -= Integer::from(&c) * &g[j as usize];
        }
        c = (c * Natural::from(k - j)).div_exact(Natural::from(j + 1));
    }
    ExactProbability::new(total, w.denominator.clone())
}

/// One evaluation of the return tail.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTailQuery {
    pub a: Rational,
    pub q: Rational,
    pub n: ChainLength,
    pub k: u64,
}

/// `P(k) = sum_{i=1}^n a^-i Sigma_i^k` for a finite chain.
pub fn return_tail_finite(query: &ReturnTailQuery) -> Result<ExactProbability, TailError> {
    if query.n == ChainLength::Infinite {
        return Err(TailError::WrongChainLength("expected a finite chain"));
    }
    Ok(PsstTail::new(query.a.clone(), query.q.clone())?.tail(query.n, query.k))
}

/// `P(k) = sum_j C(k, j) (-1)^j / (a (a/q)^j - 1)` for the infinite chain.
pub fn return_tail_infinite(query: &ReturnTailQuery) -> Result<ExactProbability, TailError> {
    if query.n != ChainLength::Infinite {
        return Err(TailError::WrongChainLength("expected the infinite chain"));
    }
    Ok(PsstTail::new(query.a.clone(), query.q.clone())?.tail(query.n, query.k))
}

/// `(k, P(k) e^(epsilon k))` over `ks`.
///
/// A tail is heavy when this product grows without bound for every
/// `epsilon > 0`.
pub fn heavy_tail_probe(
    tail: &PsstTail,
    n: ChainLength,
    epsilon: f64,
    ks: RangeInclusive<u64>,
) -> Result<Vec<(u64, f64)>, TailError> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(TailError::InvalidParameters(format!("epsilon = {epsilon}")));
    }
    if ks.is_empty() {
        return Ok(Vec::new());
    }
    let all = tail.tails(n, *ks.end());
    Ok(ks.map(|k| (k, (all[k as usize].to_f64().ln() + epsilon * k as f64).exp())).collect())
}

/// A row of a log-log tail table.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub k: u64,
    pub tail: ExactProbability,
    pub log10_k: f64,
    pub log10_tail: f64,
}

/// Rows for `k = 0..=k_max`; the `k = 0` row has `log10_k = -inf`.
pub fn loglog_table(tail: &PsstTail, n: ChainLength, k_max: u64) -> Result<Vec<TailRow>, TailError> {
    if k_max > MAX_TABLE_K {
        return Err(TailError::KTooLarge(k_max));
    }
    Ok(tail
        .tails(n, k_max)
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            let log10_tail = p.to_f64().log10();
            TailRow { k: k as u64, tail: p, log10_k: (k as f64).log10(), log10_tail }
        })
        .collect())
}

/// CSV with columns `k, tail, log10_k, log10_tail`; tails to 30 significant
/// digits.
pub fn write_tail_csv<W: Write>(rows: &[TailRow], out: W) -> Result<(), TailError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| TailError::Csv(e.to_string());
    w.write_record(["k", "tail", "log10_k", "log10_tail"]).map_err(err)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.tail.to_decimal_string(EXPORT_DIGITS),
            r.log10_k.to_string(),
            r.log10_tail.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| TailError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_signeds(n, d)
    }

    #[test]
    fn first_values_at_three_two() {
        let t = PsstTail::new(r(3, 1), r(2, 1)).unwrap();
        assert_eq!(t.tail(ChainLength::Infinite, 0).to_rational(), r(1, 2));
        assert_eq!(t.tail(ChainLength::Infinite, 1).to_rational(), r(3, 14));
        assert_eq!(t.first_return_tail(ChainLength::Infinite, 0), ExactProbability::one());
        assert_eq!(t.first_return_tail(ChainLength::Infinite, 2).to_rational(), r(3, 14));
    }

    #[test]
    fn finite_forms_agree_exactly() {
        let t = PsstTail::new(r(7, 2), r(5, 3)).unwrap();
        for n in [1u64, 2, 5, 12] {
            for k in [0u64, 1, 2, 7, 10] {
                let direct = t.tail_with(ChainLength::Finite(n), k, TailMethod::Direct).unwrap();
                let auto = t.tail(ChainLength::Finite(n), k);
                assert_eq!(direct, auto, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn batch_matches_single() {
        let t = PsstTail::new(r(104, 5), r(52, 5)).unwrap();
        for n in [ChainLength::Infinite, ChainLength::Finite(30)] {
            let all = t.tails(n, 40);
            for k in [0u64, 1, 2, 3, 17, 40] {
                assert_eq!(all[k as usize], t.tail(n, k), "k={k}");
            }
            assert_eq!(t.tails_at(n, &[3, 40, 0]), vec![all[3].clone(), all[40].clone(), all[0].clone()]);
        }
    }

    #[test]
    fn paired_form_is_an_identity() {
        let t = PsstTail::new(r(3, 1), r(2, 1)).unwrap();
        for k in (1..40u64).step_by(2) {
            let plain = t.tail_with(ChainLength::Infinite, k, TailMethod::Alternating).unwrap();
            assert_eq!(plain, t.tail(ChainLength::Infinite, k), "k={k}");
        }
    }

    #[test]
    fn rejects_invalid() {
        assert!(PsstTail::new(r(2, 1), r(3, 2)).is_err());
        assert!(PsstTail::new(r(5, 1), r(5, 1)).is_err());
        let q = ReturnTailQuery { a: r(3, 1), q: r(2, 1), n: ChainLength::Infinite, k: 1 };
        assert!(return_tail_finite(&q).is_err());
        assert!(return_tail_infinite(&q).is_ok());
        let t = PsstTail::new(r(3, 1), r(2, 1)).unwrap();
        assert!(loglog_table(&t, ChainLength::Infinite, MAX_TABLE_K + 1).is_err());
        assert!(t.tail_with(ChainLength::Infinite, 1, TailMethod::Direct).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = PsstTail::new(r(3, 1), r(2, 1)).unwrap();
        let rows = loglog_table(&t, ChainLength::Infinite, 1).unwrap();
        let mut buf = Vec::new();
        write_tail_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,tail,log10_k,log10_tail");
        assert!(lines[1].starts_with("0,5.00000000000000000000000000000e-1,-inf,"));
        assert!(lines[2].starts_with("1,2.14285714285714285714285714286e-1,0,"));
        assert_eq!(lines.len(), 3);
    }
}
