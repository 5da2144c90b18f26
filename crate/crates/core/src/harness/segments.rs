use std::io::Write;

use rayon::prelude::*;

use crate::queue::{queue_stats, QueueConfig, SweepPoint, SWEEP_THRESHOLDS};
use crate::trace::PacketTrace;

use super::{at, HarnessError};

/// The sweep of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSweep {
    /// 0 for the first segment.
    pub index: usize,
    pub packets: usize,
    pub span: f64,
    pub points: Vec<SweepPoint>,
}

/// Splits `trace` into consecutive segments of `segment_size` packets (at
/// most `max_segments` of them) and queues each one.
///
/// The bandwidth for each target occupancy is set from the first segment,
/// then reused for the others, so the later segments' achieved occupancy
/// (`stats.occupancy`) shows how their load differs. Each segment starts at
/// its first arrival and is averaged over its own span.
pub fn segment_analysis(
    trace: &PacketTrace,
    segment_size: usize,
    max_segments: Option<usize>,
    occupancies: &[f64],
) -> Result<Vec<SegmentSweep>, HarnessError> {
    if segment_size == 0 {
        return Err(HarnessError::config("segment_size", "must be positive"));
    }
    if let Some(o) = occupancies.iter().find(|&&o| !(o > 0.0 && o < 1.0)) {
        return Err(HarnessError::config("occupancies", format!("{o} is outside (0, 1)")));
    }
    let available = trace.len() / segment_size;
    let count = max_segments.map_or(available, |m| m.min(available));
    if count < 2 || max_segments.is_some_and(|m| m < 2) {
        return Err(HarnessError::config(
            "segment_size",
            format!("{} packets give {available} segment(s) of {segment_size}; at least two are needed", trace.len()),
        ));
    }
    let segments: Vec<PacketTrace> =
        (0..count).map(|i| trace.segment(i * segment_size, (i + 1) * segment_size)).collect();
    let first = &segments[0];
    if !(first.span() > 0.0) {
        return Err(HarnessError::Stage { stage: "segments", message: "first segment has zero span".into() });
    }
    let bits = first.total_bits() as f64;
    let bandwidths: Vec<f64> = occupancies.iter().map(|o| bits / (o * first.span())).collect();
    segments
        .par_iter()
        .enumerate()
        .map(|(index, seg)| {
            let points = occupancies
                .iter()
                .zip(&bandwidths)
                .map(|(&occupancy, &bandwidth)| {
                    let cfg = QueueConfig::new(bandwidth).map_err(at("segments"))?;
                    let stats = queue_stats(seg, cfg, seg.span()).map_err(at("segments"))?;
                    Ok(SweepPoint { occupancy, bandwidth, stats })
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;
            Ok(SegmentSweep { index, packets: seg.len(), span: seg.span(), points })
        })
        .collect()
}

/// `(max - min) / mean` of the achieved occupancy across segments at the
/// `point`-th target.
pub fn segment_spread(segments: &[SegmentSweep], point: usize) -> f64 {
    let occ: Vec<f64> = segments.iter().map(|s| s.points[point].stats.occupancy).collect();
    let mean = occ.iter().sum::<f64>() / occ.len() as f64;
    let max = occ.iter().cloned().fold(f64::MIN, f64::max);
    let min = occ.iter().cloned().fold(f64::MAX, f64::min);
    (max - min) / mean
}

/// Long format: `segment, target_occupancy, bandwidth_bps, occupancy,
/// mean_q_packets, mean_q_bits, p_ge_5, p_ge_20`.
pub fn write_segments_csv<W: Write>(segments: &[SegmentSweep], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "segment",
        "target_occupancy",
        "bandwidth_bps",
        "occupancy",
        "mean_q_packets",
        "mean_q_bits",
        "p_ge_5",
        "p_ge_20",
    ])
    .map_err(at("output"))?;
    for s in segments {
        for p in &s.points {
            w.write_record([
                (s.index + 1).to_string(),
                p.occupancy.to_string(),
                p.bandwidth.to_string(),
                p.stats.occupancy.to_string(),
                p.stats.mean_q_packets.to_string(),
                p.stats.mean_q_bits.to_string(),
                p.stats.p_ge(SWEEP_THRESHOLDS[0]).to_string(),
                p.stats.p_ge(SWEEP_THRESHOLDS[1]).to_string(),
            ])
            .map_err(at("output"))?;
        }
    }
    w.flush().map_err(at("output"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Packet;

    fn trace(gaps: &[f64]) -> PacketTrace {
        let mut t = 0.0;
        let records = gaps
            .iter()
            .map(|g| {
                t += g;
                Packet::new(t, 100)
            })
            .collect();
        PacketTrace::new(records).unwrap()
    }

    #[test]
    fn later_segments_keep_the_first_bandwidth() {
        let mut gaps = vec![1.0; 10];
        gaps.extend(vec![2.0; 10]);
        let segs = segment_analysis(&trace(&gaps), 10, None, &[0.5]).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].points[0].bandwidth, segs[1].points[0].bandwidth);
        assert!((segs[0].points[0].stats.occupancy - 0.5).abs() < 1e-12);
        // 10 packets over 18 s instead of 9 s
        assert!((segs[1].points[0].stats.occupancy - 0.25).abs() < 1e-12);
        assert!((segment_spread(&segs, 0) - 0.25 / 0.375).abs() < 1e-12);
    }

    #[test]
    fn too_few_segments() {
        let t = trace(&[1.0; 15]);
        assert!(segment_analysis(&t, 10, None, &[0.5]).unwrap_err().is_validation());
        assert!(segment_analysis(&t, 5, Some(1), &[0.5]).unwrap_err().is_validation());
        assert_eq!(segment_analysis(&t, 5, Some(2), &[0.5]).unwrap().len(), 2);
        assert!(segment_analysis(&t, 5, None, &[1.5]).is_err());
    }
}
