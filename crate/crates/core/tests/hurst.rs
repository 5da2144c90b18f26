use onoff::hurst::{
    bin_series, estimate, estimate_all, estimate_values, report_rows, write_hurst_csv, BinUnit, BinnedSeries,
    HurstConfig, HurstError, HurstMethod,
};
use onoff::models::fgn;
use onoff::rng::seeded;
use onoff::trace::{Packet, PacketTrace};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn aggregated_variance_of_white_noise_has_slope_minus_one() {
    let x = noise(1_000_000, 3);
    let e = estimate_values(&x, HurstMethod::AggregatedVariance, &HurstConfig::default()).unwrap();
    assert!((e.h - 0.5).abs() < 0.05, "{}", e.h);
    assert!((e.slope + 1.0).abs() < 0.1);
    assert_eq!(e.fit_lo, 10.0);
    assert!(e.fit_hi <= 100_000.0 && e.fit_hi > 70_000.0, "{}", e.fit_hi);
}

#[test]
fn fgn_is_recovered() {
    let x = fgn(0.8, 1 << 20, &mut seeded(8)).unwrap();
    let series = BinnedSeries { counts: x, bin_width: 1.0 };
    let report = estimate_all(&series);
    assert!(report.failures.is_empty());
    for m in [HurstMethod::AggregatedVariance, HurstMethod::LocalWhittle] {
        let h = report.estimates[&m].h;
        assert!((h - 0.8).abs() <= 0.08, "{m}: {h}");
    }
}

#[test]
fn estimates_are_deterministic() {
    let x = fgn(0.7, 1 << 14, &mut seeded(2)).unwrap();
    let s = BinnedSeries { counts: x, bin_width: 0.01 };
    assert_eq!(estimate_all(&s), estimate_all(&s));
}

#[test]
fn constant_series_fails_every_method() {
    let s = BinnedSeries { counts: vec![3.0; 5000], bin_width: 0.1 };
    let report = estimate_all(&s);
    assert!(report.estimates.is_empty());
    assert_eq!(report.failures.len(), 5);
    let rows = report_rows("flat", 0.1, &report);
    let mut buf = Vec::new();
    write_hurst_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().nth(1).unwrap().starts_with("flat,0.1,rs,,,,,,"));
    assert_eq!(estimate(&BinnedSeries { counts: vec![1.0, 2.0], bin_width: 1.0 }, HurstMethod::RescaledRange).unwrap_err(), HurstError::TooShort(2));
}

#[test]
fn diagnostics_report_fit_ranges() {
    let x = noise(1 << 16, 4);
    let report = estimate_all(&BinnedSeries { counts: x, bin_width: 1.0 });
    let wav = &report.estimates[&HurstMethod::Wavelet];
    assert_eq!((wav.fit_lo, wav.fit_hi), (3.0, 12.0));
    let lw = &report.estimates[&HurstMethod::LocalWhittle];
    assert_eq!(lw.points, (65536f64).powf(0.65).floor() as usize);
    assert!((lw.slope - (1.0 - 2.0 * lw.h)).abs() < 1e-15);
    let rs = &report.estimates[&HurstMethod::RescaledRange];
    assert!(rs.fit_lo >= 100.0);
}

#[test]
fn bellcore_sized_binning() {
    let t = PacketTrace::new(vec![Packet::new(0.0, 464), Packet::new(100.0, 464)])
        .unwrap()
        .with_duration(252.08)
        .unwrap();
    let b = bin_series(&t, 0.01, BinUnit::Bits).unwrap();
    assert_eq!(b.counts.len(), 25208);
    assert_eq!(b.counts[10_000], 464.0);
    assert_eq!(bin_series(&t, 0.1, BinUnit::Bits).unwrap().counts.len(), 2521);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scale_and_shift_leave_estimates_unchanged(n in 256usize..3000, seed in any::<u64>(), c in 0.01f64..100.0, d in -100.0f64..100.0) {
        let x = noise(n, seed);
        let y: Vec<f64> = x.iter().map(|v| c * v + d).collect();
        let cfg = HurstConfig::default();
        for m in HurstMethod::ALL {
            match (estimate_values(&x, m, &cfg), estimate_values(&y, m, &cfg)) {
                (Ok(a), Ok(b)) => prop_assert!((a.h - b.h).abs() < 1e-9, "{}: {} vs {}", m, a.h, b.h),
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert!(false, "{}: {:?} vs {:?}", m, a, b),
            }
        }
    }

    #[test]
    fn bins_partition_the_trace(gaps in prop::collection::vec((0.0f64..0.05, 1u64..1500), 1..300), w in 0.001f64..0.2) {
        let mut t = 0.0;
        let trace = PacketTrace::new(gaps.iter().map(|&(g, b)| { t += g; Packet::new(t, b) }).collect()).unwrap();
        let bits = bin_series(&trace, w, BinUnit::Bits).unwrap();
        let packets = bin_series(&trace, w, BinUnit::Packets).unwrap();
        prop_assert_eq!(bits.counts.iter().sum::<f64>(), trace.total_bits() as f64);
        prop_assert_eq!(packets.counts.iter().sum::<f64>(), trace.len() as f64);
        prop_assert!(bits.counts.len() as f64 >= (trace.span() / w).ceil() - 1.0);
    }
}
