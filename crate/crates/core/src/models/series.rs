use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use super::ModelError;

/// Run-length counts: `length -> number of runs`.
pub type Histogram = BTreeMap<u64, u64>;

/// An on/off sequence, one symbol per time slot.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BinarySeries {
    values: Vec<u8>,
}

/// Lengths of the maximal runs of ones and zeros in a series.
///
/// Only runs bounded on both sides by the opposite symbol are counted, so the
/// first and last runs, whose true lengths are unknown, never appear.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunLengths {
    pub on: Histogram,
    pub off: Histogram,
}

impl BinarySeries {
    /// Wraps `values`, rejecting anything other than 0 or 1.
    pub fn new(values: Vec<u8>) -> Result<Self, ModelError> {
        if let Some(pos) = values.iter().position(|&v| v > 1) {
            return Err(ModelError::InvalidSymbol { index: pos, value: values[pos] });
        }
        Ok(Self { values })
    }

    pub(crate) fn from_bits_unchecked(values: Vec<u8>) -> Self {
        debug_assert!(values.iter().all(|&v| v <= 1));
        Self { values }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        Self { values: bits.into_iter().map(u8::from).collect() }
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u8> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1).count()
    }

    /// Fraction of slots that are on; 0 for an empty series.
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.ones() as f64 / self.values.len() as f64
        }
    }

    /// On and off swapped.
    pub fn complement(&self) -> Self {
        Self { values: self.values.iter().map(|&v| 1 - v).collect() }
    }

    /// The series as `f64` values, for estimators that want a real series.
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }

    pub fn run_lengths(&self) -> RunLengths {
        let mut runs = RunLengths::default();
        let mut iter = self.values.iter().copied();
        let Some(mut current) = iter.next() else { return runs };
        let mut len = 1u64;
        let mut first = true;
        for v in iter {
            if v == current {
                len += 1;
                continue;
            }
            if !first {
                let h = if current == 1 { &mut runs.on } else { &mut runs.off };
                *h.entry(len).or_default() += 1;
            }
            first = false;
            current = v;
            len = 1;
        }
        runs
    }

    /// Newline-free text of `'0'` and `'1'` characters.
    pub fn to_text(&self) -> String {
        self.values.iter().map(|&v| if v == 1 { '1' } else { '0' }).collect()
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let mut values = Vec::with_capacity(text.len());
        for (i, c) in text.trim_end().chars().enumerate() {
            match c {
                '0' => values.push(0),
                '1' => values.push(1),
                _ => return Err(ModelError::InvalidText { index: i, found: c }),
            }
        }
        Ok(Self { values })
    }

    pub fn write_text(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_text())
    }

    pub fn read_text(path: &Path) -> Result<Self, ModelError> {
        let text = fs::read_to_string(path).map_err(|e| ModelError::Io(e.to_string()))?;
        Self::from_text(&text)
    }
}

impl fmt::Debug for BinarySeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 64;
        let head: String = self.values.iter().take(SHOWN).map(|&v| if v == 1 { '1' } else { '0' }).collect();
        let more = if self.values.len() > SHOWN { "..." } else { "" };
        write!(f, "BinarySeries(len={}, {head}{more})", self.values.len())
    }
}
