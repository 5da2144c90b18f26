use crate::models::BinarySeries;
use crate::trace::{Packet, PacketTrace};

use super::QueueError;

const SNAP_SECONDS: f64 = 1e-9;

/// Fixed packet length `l` (bits) and slot width `dt` (seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitiserConfig {
    packet_bits: u64,
    slot: f64,
}

impl DigitiserConfig {
    pub fn new(packet_bits: u64, slot: f64) -> Result<Self, QueueError> {
        if packet_bits == 0 || !(slot > 0.0 && slot.is_finite()) {
            return Err(QueueError::Digitiser);
        }
        Ok(Self { packet_bits, slot })
    }

    /// `dt = l / b`: one packet per slot saturates a link of `bandwidth`.
    pub fn from_bandwidth(packet_bits: u64, bandwidth: f64) -> Result<Self, QueueError> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(QueueError::Bandwidth(bandwidth));
        }
        Self::new(packet_bits, packet_bits as f64 / bandwidth)
    }

    pub fn packet_bits(&self) -> u64 {
        self.packet_bits
    }

    pub fn slot(&self) -> f64 {
        self.slot
    }

    /// `l / dt`.
    pub fn bandwidth(&self) -> f64 {
        self.packet_bits as f64 / self.slot
    }

    /// Index of the first slot boundary at or after `t`. Times within a
    /// nanosecond of a boundary, the resolution of the text trace formats,
    /// snap to it.
    pub fn slot_of(&self, t: f64) -> u64 {
        let x = t / self.slot;
        let r = x.round();
        let tol = (SNAP_SECONDS / self.slot).max(4.0 * f64::EPSILON * x);
        if (x - r).abs() <= tol {
            r as u64
        } else {
            x.ceil() as u64
        }
    }

    pub fn slot_time(&self, n: u64) -> f64 {
        n as f64 * self.slot
    }
}

/// Re-sends `trace` as fixed-length packets on a slot grid.
///
/// At each instant `n dt`, once every packet arriving at or before that
/// instant has been added to a bit buffer, one packet of `l` bits leaves if
/// the buffer holds at least `l` bits. The residue below `l` at the end is
/// never sent. The output's duration covers the input's span and the last
/// emitted slot.
///
/// ```
/// use onoff::queue::{digitise, DigitiserConfig};
/// use onoff::trace::{Packet, PacketTrace};
///
/// let cfg = DigitiserConfig::new(100, 1.0).unwrap();
/// let t = PacketTrace::new(vec![Packet::new(0.0, 150), Packet::new(0.4, 50)]).unwrap();
/// let out = digitise(&t, cfg);
/// let times: Vec<f64> = out.records().iter().map(|p| p.time).collect();
/// assert_eq!(times, vec![0.0, 1.0]);
/// ```
pub fn digitise(trace: &PacketTrace, cfg: DigitiserConfig) -> PacketTrace {
    let l = cfg.packet_bits;
    let mut out = Vec::new();
    let mut buffer = 0u64;
    let mut slot = 0u64;
    let records = trace.records();
    let mut i = 0;
    while i < records.len() {
        let s = cfg.slot_of(records[i].time);
        while slot < s && buffer >= l {
            out.push(Packet::new(cfg.slot_time(slot), l));
            buffer -= l;
            slot += 1;
        }
        slot = slot.max(s);
        while i < records.len() && cfg.slot_of(records[i].time) == s {
            buffer += records[i].bits;
            i += 1;
        }
    }
    while buffer >= l {
        out.push(Packet::new(cfg.slot_time(slot), l));
        buffer -= l;
        slot += 1;
    }
    let end = out.last().map_or(0.0, |p| p.time + cfg.slot);
    PacketTrace::from_sorted_unchecked(out, Some(trace.span().max(end)))
}

/// Slot `i` holding a 1 becomes a packet of `l` bits at `i dt`; the
/// duration is `n dt`.
pub fn binary_to_trace(series: &BinarySeries, cfg: DigitiserConfig) -> PacketTrace {
    let records = series
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == 1)
        .map(|(i, _)| Packet::new(cfg.slot_time(i as u64), cfg.packet_bits))
        .collect();
    PacketTrace::from_sorted_unchecked(records, Some(cfg.slot_time(series.len() as u64)))
}

/// Inverse of [`binary_to_trace`] for traces already on the slot grid.
pub fn trace_to_binary(trace: &PacketTrace, cfg: DigitiserConfig) -> Result<BinarySeries, QueueError> {
    let mut slots = Vec::with_capacity(trace.len());
    for (index, p) in trace.records().iter().enumerate() {
        if p.bits != cfg.packet_bits {
            return Err(QueueError::NotSlotted { index, bits: p.bits, expected: cfg.packet_bits });
        }
        let s = cfg.slot_of(p.time);
        if slots.last() == Some(&s) {
            return Err(QueueError::SlotClash(s));
        }
        slots.push(s);
    }
    let by_span = cfg.slot_of(trace.span());
    let n = slots.last().map_or(0, |s| s + 1).max(by_span) as usize;
    let mut values = vec![0u8; n];
    for s in slots {
        values[s as usize] = 1;
    }
    Ok(BinarySeries::new(values).expect("only zeros and ones"))
}
