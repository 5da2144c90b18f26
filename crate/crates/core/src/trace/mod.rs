//! Packet traces and their text format.
//!
//! A trace is an ordered list of `(arrival time in seconds, length in bits)`
//! records with an optional explicit duration. On disk it is one record per
//! line, `time length`, with the time printed to nine decimal places and the
//! length either in bits or in bytes according to a [`TraceFormat`] given by
//! the caller. Lines starting with `#` and blank lines are ignored.
//!
//! ```text
//! # time length
//! 0.000000000 58
//! 0.001250000 1500
//! ```

use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

/// One packet arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    /// Arrival time in seconds.
    pub time: f64,
    /// Length in bits.
    pub bits: u64,
}

impl Packet {
    pub fn new(time: f64, bits: u64) -> Self {
        Self { time, bits }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error("record {index}: arrival time {time} is before the previous one {previous}")]
    Decreasing { index: usize, time: f64, previous: f64 },
    #[error("record {index}: arrival time {time} is not a finite non-negative number")]
    BadTime { index: usize, time: f64 },
    #[error("record {index}: packet length must be positive")]
    ZeroLength { index: usize },
    #[error("duration {duration} is shorter than the last arrival {last}")]
    ShortDuration { duration: f64, last: f64 },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: arrival time {time} is before the previous one {previous}")]
    DecreasingLine { line: usize, time: f64, previous: f64 },
    #[error("trace file contains no records")]
    Empty,
    #[error("record {index}: {bits} bits is not a whole number of bytes")]
    NotByteMultiple { index: usize, bits: u64 },
    #[error("unknown trace format {0:?} (expected seconds-bits or seconds-bytes)")]
    UnknownFormat(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<io::Error> for TraceError {
    fn from(e: io::Error) -> Self {
        TraceError::Io(e.to_string())
    }
}

/// Packet arrivals in time order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PacketTrace {
    records: Vec<Packet>,
    duration: Option<f64>,
}

impl PacketTrace {
    /// Checks that times are finite, non-negative and non-decreasing and
    /// that every length is positive.
    pub fn new(records: Vec<Packet>) -> Result<Self, TraceError> {
        let mut previous = 0.0;
        for (index, p) in records.iter().enumerate() {
            if !(p.time.is_finite() && p.time >= 0.0) {
                return Err(TraceError::BadTime { index, time: p.time });
            }
            if p.time < previous {
                return Err(TraceError::Decreasing { index, time: p.time, previous });
            }
            if p.bits == 0 {
                return Err(TraceError::ZeroLength { index });
            }
            previous = p.time;
        }
        Ok(Self { records, duration: None })
    }

    pub(crate) fn from_sorted_unchecked(records: Vec<Packet>, duration: Option<f64>) -> Self {
        debug_assert!(records.windows(2).all(|w| w[0].time <= w[1].time));
        Self { records, duration }
    }

    /// Sets the observation window to `[0, duration]`.
    pub fn with_duration(mut self, duration: f64) -> Result<Self, TraceError> {
        let last = self.last_arrival();
        if !(duration.is_finite() && duration >= last) {
            return Err(TraceError::ShortDuration { duration, last });
        }
        self.duration = Some(duration);
        Ok(self)
    }

    pub fn records(&self) -> &[Packet] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn duration(&self) -> Option<f64> {
        self.duration
    }

    pub fn last_arrival(&self) -> f64 {
        self.records.last().map_or(0.0, |p| p.time)
    }

    /// The explicit duration if set, otherwise the last arrival time.
    pub fn span(&self) -> f64 {
        self.duration.unwrap_or_else(|| self.last_arrival())
    }

    pub fn total_bits(&self) -> u64 {
        self.records.iter().map(|p| p.bits).sum()
    }

    /// The first `n` records; the explicit duration is dropped.
    pub fn first(&self, n: usize) -> Self {
        Self { records: self.records[..n.min(self.records.len())].to_vec(), duration: None }
    }

    /// Records `start..end`, shifted so the first arrival of the slice is
    /// at time 0.
    pub fn segment(&self, start: usize, end: usize) -> Self {
        let slice = &self.records[start..end];
        let t0 = slice.first().map_or(0.0, |p| p.time);
        let records = slice.iter().map(|p| Packet::new((p.time - t0).max(0.0), p.bits)).collect();
        Self { records, duration: None }
    }
}

/// Unit of the length column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceFormat {
    SecondsBits,
    SecondsBytes,
}

impl FromStr for TraceFormat {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "seconds-bits" | "bits" => Ok(TraceFormat::SecondsBits),
            "seconds-bytes" | "bytes" => Ok(TraceFormat::SecondsBytes),
            _ => Err(TraceError::UnknownFormat(s.to_string())),
        }
    }
}

impl fmt::Display for TraceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceFormat::SecondsBits => "seconds-bits",
            TraceFormat::SecondsBytes => "seconds-bytes",
        })
    }
}

/// Reads a whole trace.
pub fn load_trace(path: &Path, format: TraceFormat) -> Result<PacketTrace, TraceError> {
    load_trace_first(path, format, None)
}

/// Reads at most `first` records (all of them for `None`).
pub fn load_trace_first(path: &Path, format: TraceFormat, first: Option<usize>) -> Result<PacketTrace, TraceError> {
    let file = fs::File::open(path)?;
    read_trace(BufReader::new(file), format, first)
}

/// Parses the text format from any reader.
///
/// ```
/// use onoff::trace::{read_trace, TraceFormat};
///
/// let t = read_trace("# header\n0.001 58\n".as_bytes(), TraceFormat::SecondsBytes, None).unwrap();
/// assert_eq!(t.records()[0].bits, 464);
/// ```
pub fn read_trace<R: BufRead>(reader: R, format: TraceFormat, first: Option<usize>) -> Result<PacketTrace, TraceError> {
    let mut records = Vec::new();
    let mut previous = 0.0;
    for (i, line) in reader.lines().enumerate() {
        if first.is_some_and(|n| records.len() >= n) {
            break;
        }
        let line = line?;
        let line_no = i + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let parse_err = |reason: String| TraceError::Parse { line: line_no, reason };
        let mut fields = text.split_whitespace();
        let (Some(t), Some(len), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(format!("expected two fields, got {text:?}")));
        };
        let time: f64 = t.parse().map_err(|_| parse_err(format!("bad time {t:?}")))?;
        if !(time.is_finite() && time >= 0.0) {
            return Err(parse_err(format!("bad time {t:?}")));
        }
        let length: u64 = len.parse().map_err(|_| parse_err(format!("bad length {len:?}")))?;
        if length == 0 {
            return Err(parse_err("zero length".into()));
        }
        let bits = match format {
            TraceFormat::SecondsBits => length,
            TraceFormat::SecondsBytes => {
                length.checked_mul(8).ok_or_else(|| parse_err(format!("length {len} overflows")))?
            }
        };
        if time < previous {
            return Err(TraceError::DecreasingLine { line: line_no, time, previous });
        }
        previous = time;
        records.push(Packet::new(time, bits));
    }
    if records.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(PacketTrace::from_sorted_unchecked(records, None))
}

/// Writes `trace` in the text format.
pub fn save_trace(trace: &PacketTrace, path: &Path, format: TraceFormat) -> Result<(), TraceError> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_trace(trace, &mut w, format)?;
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(trace: &PacketTrace, out: &mut W, format: TraceFormat) -> Result<(), TraceError> {
    for (index, p) in trace.records().iter().enumerate() {
        let length = match format {
            TraceFormat::SecondsBits => p.bits,
            TraceFormat::SecondsBytes => {
                if p.bits % 8 != 0 {
                    return Err(TraceError::NotByteMultiple { index, bits: p.bits });
                }
                p.bits / 8
            }
        };
        writeln!(out, "{:.9} {}", p.time, length)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(trace: &PacketTrace, format: TraceFormat) -> String {
        let mut buf = Vec::new();
        write_trace(trace, &mut buf, format).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn writes_nine_decimals() {
        let t = PacketTrace::new(vec![Packet::new(0.0, 464)]).unwrap();
        assert_eq!(text(&t, TraceFormat::SecondsBits), "0.000000000 464\n");
        assert_eq!(text(&t, TraceFormat::SecondsBytes), "0.000000000 58\n");
    }

    #[test]
    fn bytes_export_needs_whole_bytes() {
        let t = PacketTrace::new(vec![Packet::new(0.0, 465)]).unwrap();
        let mut buf = Vec::new();
        assert!(matches!(
            write_trace(&t, &mut buf, TraceFormat::SecondsBytes),
            Err(TraceError::NotByteMultiple { index: 0, bits: 465 })
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = read_trace("0.1 10\n# c\n0.2 x\n".as_bytes(), TraceFormat::SecondsBits, None).unwrap_err();
        assert!(matches!(err, TraceError::Parse { line: 3, .. }), "{err}");
        let err = read_trace("0.2 10\n0.1 10\n".as_bytes(), TraceFormat::SecondsBits, None).unwrap_err();
        assert!(matches!(err, TraceError::DecreasingLine { line: 2, .. }));
        assert_eq!(read_trace("".as_bytes(), TraceFormat::SecondsBits, None), Err(TraceError::Empty));
        assert!(read_trace("0.1 10 3\n".as_bytes(), TraceFormat::SecondsBits, None).is_err());
    }

    #[test]
    fn first_n_records() {
        let t = read_trace("0 1\n1 1\n2 1\n".as_bytes(), TraceFormat::SecondsBits, Some(2)).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn validation() {
        assert!(PacketTrace::new(vec![Packet::new(1.0, 1), Packet::new(0.5, 1)]).is_err());
        assert!(PacketTrace::new(vec![Packet::new(0.0, 0)]).is_err());
        assert!(PacketTrace::new(vec![Packet::new(f64::NAN, 1)]).is_err());
        let t = PacketTrace::new(vec![Packet::new(2.0, 1)]).unwrap();
        assert!(t.clone().with_duration(1.0).is_err());
        assert_eq!(t.with_duration(3.0).unwrap().span(), 3.0);
    }

    #[test]
    fn format_names() {
        assert_eq!("seconds-bytes".parse::<TraceFormat>().unwrap(), TraceFormat::SecondsBytes);
        assert_eq!("SECONDS_BITS".parse::<TraceFormat>().unwrap(), TraceFormat::SecondsBits);
        assert!("pcap".parse::<TraceFormat>().is_err());
    }
}
