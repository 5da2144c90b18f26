//! Single-server FIFO link, the digitiser and occupancy sweeps.
//!
//! A packet of `L` bits that reaches the head of the queue is transmitted in
//! `L / b` seconds and counts as queued, in full, until the instant its
//! transmission ends. Statistics are exact time averages of the
//! piecewise-constant queue length over `[0, horizon]`. When an arrival and
//! a departure share a timestamp the departure is processed first.

mod digitise;
mod sweep;

use std::io::Write;

use crate::trace::{Packet, PacketTrace};

pub use digitise::{binary_to_trace, digitise, trace_to_binary, DigitiserConfig};
pub use sweep::{default_occupancies, occupancy_sweep, write_exceedance_csv, write_sweep_csv, SweepPoint, SWEEP_THRESHOLDS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueueError {
    #[error("bandwidth must be positive and finite, got {0}")]
    Bandwidth(f64),
    #[error("horizon must be finite and non-negative, got {0}")]
    Horizon(f64),
    #[error("packet {index} arrives at {time}, after the horizon {horizon}")]
    AfterHorizon { index: usize, time: f64, horizon: f64 },
    #[error("utilisation must lie in [0, 1), got {0}")]
    Utilisation(f64),
    #[error("occupancy must lie in (0, 1), got {0}")]
    Occupancy(f64),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("trace carries no time span")]
    ZeroSpan,
    #[error("packet length must be positive and slot width finite and positive")]
    Digitiser,
    #[error("packet {index} of {bits} bits does not fit the {expected}-bit slot grid")]
    NotSlotted { index: usize, bits: u64, expected: u64 },
    #[error("two packets in slot {0}")]
    SlotClash(u64),
    #[error("csv: {0}")]
    Csv(String),
}

/// Link speed in bits per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueConfig {
    bandwidth: f64,
}

impl QueueConfig {
    pub fn new(bandwidth: f64) -> Result<Self, QueueError> {
        if bandwidth > 0.0 && bandwidth.is_finite() {
            Ok(Self { bandwidth })
        } else {
            Err(QueueError::Bandwidth(bandwidth))
        }
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
}

/// Time-averaged behaviour of one queue run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueueStats {
    pub bandwidth: f64,
    pub horizon: f64,
    /// Mean number of packets in the system.
    pub mean_q_packets: f64,
    /// Mean number of bits in the system.
    pub mean_q_bits: f64,
    /// `exceedance[q]` is the fraction of time with at least `q` packets
    /// queued; `exceedance[0] = 1` for a positive horizon.
    pub exceedance: Vec<f64>,
    /// Offered bits over `bandwidth * horizon`.
    pub occupancy: f64,
    /// Mean time from arrival to end of transmission, over all packets.
    pub mean_delay: f64,
    pub packets_in: u64,
    pub packets_out: u64,
    pub bits_in: u64,
    /// Bits whose transmission ended by the horizon.
    pub bits_out: u64,
    /// Bits still queued at the horizon.
    pub bits_at_horizon: u64,
}

impl QueueStats {
    /// `P(Q >= q)`.
    pub fn p_ge(&self, q: u64) -> f64 {
        self.exceedance.get(q as usize).copied().unwrap_or(0.0)
    }
}

/// Statistics plus the output packet stream.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueRun {
    pub stats: QueueStats,
    /// Every packet at its departure time, horizon or not.
    pub departures: PacketTrace,
}

/// Runs `trace` through a FIFO link of bandwidth `cfg` and averages over
/// `[0, horizon]`.
///
/// ```
/// use onoff::queue::{simulate_queue, QueueConfig};
/// use onoff::trace::{Packet, PacketTrace};
///
/// let trace = PacketTrace::new(vec![Packet::new(0.0, 50), Packet::new(0.0, 50)]).unwrap();
/// let run = simulate_queue(&trace, QueueConfig::new(100.0).unwrap(), 1.0).unwrap();
/// assert_eq!(run.stats.mean_q_packets, 1.5);
/// assert_eq!(run.stats.mean_q_bits, 75.0);
/// ```
pub fn simulate_queue(trace: &PacketTrace, cfg: QueueConfig, horizon: f64) -> Result<QueueRun, QueueError> {
    let (stats, departures) = run(trace, cfg, horizon)?;
    let end = departures.last().map_or(horizon, |p| p.time.max(horizon));
    Ok(QueueRun { stats, departures: PacketTrace::from_sorted_unchecked(departures, Some(end)) })
}

/// [`simulate_queue`] without keeping the departures.
pub fn queue_stats(trace: &PacketTrace, cfg: QueueConfig, horizon: f64) -> Result<QueueStats, QueueError> {
    run(trace, cfg, horizon).map(|(stats, _)| stats)
}

fn run(trace: &PacketTrace, cfg: QueueConfig, horizon: f64) -> Result<(QueueStats, Vec<Packet>), QueueError> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(QueueError::Horizon(horizon));
    }
    let b = cfg.bandwidth;
    let arrivals = trace.records();
    if let Some((index, p)) = arrivals.iter().enumerate().find(|(_, p)| p.time > horizon) {
        return Err(QueueError::AfterHorizon { index, time: p.time, horizon });
    }

    let mut departures = Vec::with_capacity(arrivals.len());
    let mut last = 0.0f64;
    let mut delay_sum = 0.0;
    for p in arrivals {
        last = last.max(p.time) + p.bits as f64 / b;
        delay_sum += last - p.time;
        departures.push(Packet::new(last, p.bits));
    }

    // sweep the merged event sequence; departures win ties
    let mut level_time: Vec<f64> = vec![0.0];
    let mut count = 0usize;
    let mut bits = 0u64;
    let mut area_bits = 0.0;
    let mut now = 0.0f64;
    let (mut i, mut j) = (0, 0);
    let mut bits_out = 0u64;
    let mut packets_out = 0u64;
    loop {
        let next_arrival = arrivals.get(i).map(|p| p.time);
        let next_departure = departures.get(j).map(|p| p.time);
        let (t, is_departure) = match (next_arrival, next_departure) {
            (None, None) => break,
            (Some(a), Some(d)) if d <= a => (d, true),
            (Some(a), _) => (a, false),
            (None, Some(d)) => (d, true),
        };
        if t > horizon {
            break;
        }
        let dt = t - now;
        if dt > 0.0 {
            level_time[count] += dt;
            area_bits += bits as f64 * dt;
            now = t;
        }
        if is_departure {
            count -= 1;
            bits -= departures[j].bits;
            bits_out += departures[j].bits;
            packets_out += 1;
            j += 1;
        } else {
            count += 1;
            bits += arrivals[i].bits;
            if level_time.len() <= count {
                level_time.push(0.0);
            }
            i += 1;
        }
    }
    let dt = horizon - now;
    if dt > 0.0 {
        level_time[count] += dt;
        area_bits += bits as f64 * dt;
    }

    let bits_in = trace.total_bits();
    let mut stats = QueueStats {
        bandwidth: b,
        horizon,
        packets_in: arrivals.len() as u64,
        packets_out,
        bits_in,
        bits_out,
        bits_at_horizon: bits_in - bits_out,
        ..Default::default()
    };
    if horizon > 0.0 {
        let mut tail = 0.0;
        let mut exceedance = vec![0.0; level_time.len()];
        for q in (0..level_time.len()).rev() {
            tail += level_time[q];
            exceedance[q] = (tail / horizon).min(1.0);
        }
        exceedance[0] = 1.0;
        while exceedance.len() > 1 && exceedance.last() == Some(&0.0) {
            exceedance.pop();
        }
        stats.mean_q_packets = level_time.iter().enumerate().map(|(q, t)| q as f64 * t).sum::<f64>() / horizon;
        stats.mean_q_bits = area_bits / horizon;
        stats.exceedance = exceedance;
        stats.occupancy = bits_in as f64 / (b * horizon);
    }
    if !arrivals.is_empty() {
        stats.mean_delay = delay_sum / arrivals.len() as f64;
    }
    Ok((stats, departures))
}

/// Mean number in an M/D/1 system at utilisation `rho`:
/// `rho + rho^2 / (2 (1 - rho))`.
pub fn pk_expected_queue(rho: f64) -> Result<f64, QueueError> {
    if !(0.0..1.0).contains(&rho) {
        return Err(QueueError::Utilisation(rho));
    }
    Ok(rho + rho * rho / (2.0 * (1.0 - rho)))
}

/// Departure trace as CSV: `time_s,bits`.
pub fn write_departures_csv<W: Write>(departures: &PacketTrace, out: W) -> Result<(), QueueError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| QueueError::Csv(e.to_string());
    w.write_record(["time_s", "bits"]).map_err(err)?;
    for p in departures.records() {
        w.write_record([format!("{:.9}", p.time), p.bits.to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| QueueError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(records: &[(f64, u64)]) -> PacketTrace {
        PacketTrace::new(records.iter().map(|&(t, b)| Packet::new(t, b)).collect()).unwrap()
    }

    #[test]
    fn single_packet_fills_horizon() {
        let run = simulate_queue(&trace(&[(0.0, 100)]), QueueConfig::new(100.0).unwrap(), 1.0).unwrap();
        assert_eq!(run.departures.records()[0].time, 1.0);
        assert_eq!(run.stats.mean_q_packets, 1.0);
        assert_eq!(run.stats.occupancy, 1.0);
        assert_eq!(run.stats.p_ge(1), 1.0);
    }

    #[test]
    fn two_packets_hand_traced() {
        let run = simulate_queue(&trace(&[(0.0, 50), (0.0, 50)]), QueueConfig::new(100.0).unwrap(), 1.0).unwrap();
        let d: Vec<f64> = run.departures.records().iter().map(|p| p.time).collect();
        assert_eq!(d, vec![0.5, 1.0]);
        assert_eq!(run.stats.mean_q_packets, 1.5);
        assert_eq!(run.stats.mean_q_bits, 75.0);
        assert_eq!(run.stats.exceedance, vec![1.0, 1.0, 0.5]);
        assert_eq!(run.stats.mean_delay, 0.75);
    }

    #[test]
    fn empty_trace_gives_zeros() {
        let stats = queue_stats(&PacketTrace::default(), QueueConfig::new(10.0).unwrap(), 5.0).unwrap();
        assert_eq!(stats.mean_q_packets, 0.0);
        assert_eq!(stats.mean_q_bits, 0.0);
        assert_eq!(stats.occupancy, 0.0);
        assert_eq!(stats.p_ge(1), 0.0);
    }

    #[test]
    fn departure_before_arrival_on_ties() {
        // the first packet leaves at exactly 1.0 as the second arrives
        let stats = queue_stats(&trace(&[(0.0, 100), (1.0, 100)]), QueueConfig::new(100.0).unwrap(), 2.0).unwrap();
        assert_eq!(stats.p_ge(2), 0.0);
        assert_eq!(stats.mean_q_packets, 1.0);
    }

    #[test]
    fn horizon_cuts_transmission() {
        let stats = queue_stats(&trace(&[(0.0, 100), (0.0, 100)]), QueueConfig::new(100.0).unwrap(), 1.5).unwrap();
        assert_eq!(stats.bits_out, 100);
        assert_eq!(stats.bits_at_horizon, 100);
        assert!((stats.mean_q_packets - (2.0 + 0.5) / 1.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_late_packets_and_bad_config() {
        assert!(matches!(
            queue_stats(&trace(&[(2.0, 1)]), QueueConfig::new(1.0).unwrap(), 1.0),
            Err(QueueError::AfterHorizon { index: 0, .. })
        ));
        assert!(QueueConfig::new(0.0).is_err());
        assert!(QueueConfig::new(f64::INFINITY).is_err());
    }

    #[test]
    fn pollaczek_khinchine() {
        assert_eq!(pk_expected_queue(0.0).unwrap(), 0.0);
        assert_eq!(pk_expected_queue(0.5).unwrap(), 0.75);
        assert!((pk_expected_queue(0.9).unwrap() - 4.95).abs() < 1e-12);
        assert!(pk_expected_queue(1.0).is_err());
    }
}
