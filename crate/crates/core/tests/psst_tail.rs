use malachite::Rational;
use onoff::models::{PsstParams, PsstVariant};
use onoff::psst_tail::{
    heavy_tail_probe, loglog_table, parse_exact, return_tail_finite, return_tail_infinite, write_tail_csv,
    ChainLength, ExactProbability, PsstTail, ReturnTailQuery, TailMethod,
};
use onoff::rng::seeded;
use proptest::prelude::*;

/// Every term of `sum_i a^-i (1 - (q/a)^i)^k` is positive, so plain
/// floating point summation is accurate.
fn float_tail(a: f64, q: f64, n: u64, k: u64) -> f64 {
    (1..=n).rev().map(|i| a.powi(-(i as i32)) * (1.0 - (q / a).powi(i as i32)).powi(k as i32)).sum()
}

#[test]
fn agrees_with_positive_term_sum() {
    for (a, q) in [("3", "2"), ("20.8", "10.4"), ("5", "1.5")] {
        let t = PsstTail::from_decimal(a, q).unwrap();
        let (af, qf) = (a.parse::<f64>().unwrap(), q.parse::<f64>().unwrap());
        let exact = t.tails(ChainLength::Infinite, 60);
        for (k, p) in exact.iter().enumerate() {
            let f = float_tail(af, qf, 1500, k as u64);
            assert!((p.to_f64() - f).abs() <= 1e-12 * f, "a={a} q={q} k={k}: {} vs {f}", p.to_f64());
        }
        let finite = t.tails(ChainLength::Finite(7), 60);
        for (k, p) in finite.iter().enumerate() {
            let f = float_tail(af, qf, 7, k as u64);
            assert!((p.to_f64() - f).abs() <= 1e-12 * f);
        }
    }
}

#[test]
fn summation_methods_agree_exactly() {
    let t = PsstTail::from_decimal("20.8", "10.4").unwrap();
    let n = ChainLength::Finite(40);
    let batch = t.tails(n, 41);
    for k in [0u64, 1, 2, 7, 20, 41] {
        let alt = t.tail_with(n, k, TailMethod::Alternating).unwrap();
        let direct = t.tail_with(n, k, TailMethod::Direct).unwrap();
        let auto = t.tail_with(n, k, TailMethod::Auto).unwrap();
        assert_eq!(alt.to_rational(), direct.to_rational(), "k={k}");
        assert_eq!(alt.to_rational(), auto.to_rational());
        assert_eq!(alt.to_rational(), batch[k as usize].to_rational());
    }
    assert!(t.tail_with(ChainLength::Infinite, 3, TailMethod::Direct).is_err());
}

#[test]
fn query_functions_check_chain_length() {
    let q = ReturnTailQuery {
        a: Rational::from(3),
        q: Rational::from(2),
        n: ChainLength::Infinite,
        k: 1,
    };
    assert_eq!(return_tail_infinite(&q).unwrap().to_rational(), Rational::from_signeds(3, 14));
    assert!(return_tail_finite(&q).is_err());
    let q = ReturnTailQuery { n: ChainLength::Finite(1), k: 0, ..q };
    assert_eq!(return_tail_finite(&q).unwrap().to_rational(), Rational::from_signeds(1, 3));
    assert!(return_tail_infinite(&q).is_err());
}

#[test]
fn finite_chains_converge_to_the_infinite_one() {
    let t = PsstTail::from_decimal("3", "2").unwrap();
    let inf = t.tails(ChainLength::Infinite, 30);
    let big = t.tails(ChainLength::Finite(200), 30);
    for (x, y) in inf.iter().zip(&big) {
        let rel = (x.to_f64() - y.to_f64()).abs() / x.to_f64();
        assert!(rel < 1e-12, "{rel}");
        assert!(y <= x);
    }
}

#[test]
fn simulated_return_times_follow_the_exact_tail() {
    let chain = PsstParams::new(3.0, 2.0, PsstVariant::B).unwrap();
    let t = PsstTail::from_decimal("3", "2").unwrap();
    let samples = 1_000_000u64;
    let mut rng = seeded(77);
    let mut counts = [0u64; 12];
    for _ in 0..samples {
        let r = chain.sample_return_time(&mut rng);
        for (k, c) in counts.iter_mut().enumerate() {
            if r > k as u64 {
                *c += 1;
            }
        }
    }
    for (k, &c) in counts.iter().enumerate() {
        let p = t.first_return_tail(ChainLength::Infinite, k as u64).to_f64();
        let se = (p * (1.0 - p) / samples as f64).sqrt().max(1e-9);
        let observed = c as f64 / samples as f64;
        assert!((observed - p).abs() <= 4.0 * se, "k={k}: {observed} vs {p}");
    }
}

#[test]
fn truncated_chain_tail_is_eventually_light() {
    let t = PsstTail::from_decimal("20.8", "10.4").unwrap();
    let probe = heavy_tail_probe(&t, ChainLength::Finite(5), 0.01, 200..=300).unwrap();
    assert!(probe.windows(2).all(|w| w[1].1 < w[0].1));
    assert!(heavy_tail_probe(&t, ChainLength::Finite(5), -1.0, 1..=2).is_err());
}

#[test]
fn loglog_rows_and_csv() {
    let t = PsstTail::from_decimal("3", "2").unwrap();
    let rows = loglog_table(&t, ChainLength::Infinite, 3).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].log10_k, f64::NEG_INFINITY);
    assert!((rows[1].log10_tail - (3.0f64 / 14.0).log10()).abs() < 1e-15);
    let mut buf = Vec::new();
    write_tail_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,tail,log10_k,log10_tail"));
    assert!(lines.next().unwrap().starts_with("0,5.00000000000000000000000000000e-1,"));
    assert!(loglog_table(&t, ChainLength::Infinite, 1_000_000).is_err());
}

#[test]
fn exact_values_parse_and_print() {
    assert_eq!(parse_exact("20.8").unwrap(), Rational::from_signeds(104, 5));
    assert_eq!(parse_exact("104/5").unwrap(), Rational::from_signeds(104, 5));
    assert!(parse_exact("abc").is_err());
    let p = ExactProbability::from_rational(&Rational::from_signeds(3, 14));
    assert_eq!(p.to_decimal_string(5), "2.1429e-1");
    assert_eq!(ExactProbability::zero().to_decimal_string(5), "0");
    assert!(ExactProbability::zero() < p && p < ExactProbability::one());
}

fn rational() -> impl Strategy<Value = (i64, i64, i64)> {
    // q = qn / 4 in (1, 5], a = q + d / 4 with a > 2
    (5i64..=20, 1i64..=40, 0i64..=8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tails_are_probabilities_that_decrease((qn, d, n) in rational()) {
        let q = Rational::from_signeds(qn, 4);
        let mut a = Rational::from_signeds(qn + d, 4);
        if a <= 2 {
            a = Rational::from_signeds(9, 4);
        }
        prop_assume!(a > q);
        let t = PsstTail::new(a, q).unwrap();
        let chain = if n == 0 { ChainLength::Infinite } else { ChainLength::Finite(n as u64) };
        let tails = t.tails(chain, 25);
        prop_assert!(tails[0] <= ExactProbability::one());
        for w in tails.windows(2) {
            prop_assert!(w[1] <= w[0]);
            prop_assert!(w[1] >= ExactProbability::zero());
        }
        if n > 0 {
            let longer = t.tails(ChainLength::Finite(n as u64 + 1), 25);
            for (x, y) in tails.iter().zip(&longer) {
                prop_assert!(x <= y);
            }
        }
    }

    #[test]
    fn first_return_tail_shifts_by_one(k in 1u64..30) {
        let t = PsstTail::from_decimal("5", "3").unwrap();
        prop_assert_eq!(t.first_return_tail(ChainLength::Infinite, k), t.tail(ChainLength::Infinite, k - 1));
        prop_assert_eq!(t.first_return_tail(ChainLength::Infinite, 0), ExactProbability::one());
    }
}
