use std::io::Write;

use rayon::prelude::*;

use crate::trace::PacketTrace;

use super::{queue_stats, QueueConfig, QueueError, QueueStats};

/// Queue-length thresholds reported in sweep tables.
pub const SWEEP_THRESHOLDS: [u64; 2] = [5, 20];

/// One target occupancy of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub occupancy: f64,
    pub bandwidth: f64,
    pub stats: QueueStats,
}

/// 0.10, 0.15, ..., 0.60.
pub fn default_occupancies() -> Vec<f64> {
    (0..=10).map(|i| f64::from(10 + 5 * i) / 100.0).collect()
}

/// Queues `trace` once per target occupancy `rho`, at the bandwidth
/// `total bits / (rho * span)`, averaging over the trace's span.
///
/// Points are evaluated in parallel; the output keeps the input order.
pub fn occupancy_sweep(trace: &PacketTrace, occupancies: &[f64]) -> Result<Vec<SweepPoint>, QueueError> {
    if trace.is_empty() {
        return Err(QueueError::EmptyTrace);
    }
    let span = trace.span();
    if !(span > 0.0) {
        return Err(QueueError::ZeroSpan);
    }
    if let Some(&bad) = occupancies.iter().find(|&&o| !(o > 0.0 && o < 1.0)) {
        return Err(QueueError::Occupancy(bad));
    }
    let bits = trace.total_bits() as f64;
    occupancies
        .par_iter()
        .map(|&occupancy| {
            let bandwidth = bits / (occupancy * span);
            let stats = queue_stats(trace, QueueConfig::new(bandwidth)?, span)?;
            Ok(SweepPoint { occupancy, bandwidth, stats })
        })
        .collect()
}

/// Columns `occupancy, bandwidth_bps, mean_q_packets, mean_q_bits, p_ge_5,
/// p_ge_20, horizon_s`.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<(), QueueError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| QueueError::Csv(e.to_string());
    w.write_record(["occupancy", "bandwidth_bps", "mean_q_packets", "mean_q_bits", "p_ge_5", "p_ge_20", "horizon_s"])
        .map_err(err)?;
    for p in points {
        let s = &p.stats;
        w.write_record([
            p.occupancy.to_string(),
            p.bandwidth.to_string(),
            s.mean_q_packets.to_string(),
            s.mean_q_bits.to_string(),
            s.p_ge(SWEEP_THRESHOLDS[0]).to_string(),
            s.p_ge(SWEEP_THRESHOLDS[1]).to_string(),
            s.horizon.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| QueueError::Csv(e.to_string()))
}

/// Long-format exceedance curves: `occupancy, q, p_ge` for `q >= 1` up to
/// the largest queue seen at that occupancy.
pub fn write_exceedance_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<(), QueueError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| QueueError::Csv(e.to_string());
    w.write_record(["occupancy", "q", "p_ge"]).map_err(err)?;
    for p in points {
        for (q, v) in p.stats.exceedance.iter().enumerate().skip(1) {
            w.write_record([p.occupancy.to_string(), q.to_string(), v.to_string()]).map_err(err)?;
        }
    }
    w.flush().map_err(|e| QueueError::Csv(e.to_string()))
}
