//! On/off source models.
//!
//! Each model produces a [`BinarySeries`]: one symbol per time slot, 1 for a
//! packet and 0 for a gap. Four of the models are Markov-modulated, meaning an
//! underlying chain `X_t` is simulated and `Y_t` is read off from the state.
//!
//! | model | chain | `Y_t = 1` when |
//! |---|---|---|
//! | [`WangParams`] | companion matrix, power-law jumps | `X_t != 0` |
//! | [`CleggDodsonParams`] | companion matrix, second-difference jumps | `X_t != 0` |
//! | [`PsstParams`] | star of geometric sojourns | `X_t == 0` (A) or `X_t != 0` (B) |
//! | [`ArrowsmithBarencoParams`] | alternating runs from two histograms | right side |
//! | [`FgnParams`] | thresholded fractional Gaussian noise | above a quantile |
//! | [`BernoulliParams`] | i.i.d. slots | with probability `mu` |
//!
//! All chains start in state 0. [`generate`] discards a warm-up of
//! [`DEFAULT_WARMUP`] slots before recording; [`generate_with`] lets the
//! caller change that and pick an RNG stream.

mod arrowsmith_barenco;
mod bernoulli;
mod clegg_dodson;
mod fgn;
mod psst;
pub mod sampling;
mod series;
mod wang;
pub mod zeta;

use std::fmt;

use rand::Rng;

use crate::rng::{seeded_stream, SimRng};

pub use arrowsmith_barenco::{ab_acf_asymptote, AcfAsymptote, ArrowsmithBarencoParams, RunLengthLaw};
pub use bernoulli::BernoulliParams;
pub use clegg_dodson::CleggDodsonParams;
pub use fgn::{fgn, fgn_autocovariance, FgnParams, MAX_FGN_LEN};
pub use psst::{PsstParams, PsstVariant};
pub use series::{BinarySeries, Histogram, RunLengths};
pub use wang::{wang_fit_a, WangParams};

/// Slots discarded before recording when no warm-up is given.
pub const DEFAULT_WARMUP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("infeasible fit: {0}")]
    Infeasible(String),
    #[error("{0} histogram is empty")]
    EmptyHistogram(&'static str),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("series length {0} is not supported (1..={max})", max = MAX_FGN_LEN)]
    UnsupportedLength(usize),
    #[error("series length must be at least 1")]
    EmptySeries,
    #[error("symbol {value} at index {index} is not 0 or 1")]
    InvalidSymbol { index: usize, value: u8 },
    #[error("character {found:?} at index {index} is not '0' or '1'")]
    InvalidText { index: usize, found: char },
    #[error("state index must be at least 1, got {0}")]
    StateOutOfRange(u64),
    #[error("i/o: {0}")]
    Io(String),
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(ModelError::InvalidParameter { name, value, reason: "must lie in (0, 1)" })
    }
}

/// A discrete-time Markov chain on `0, 1, 2, ...` with an on/off read-out.
pub trait OnOffChain {
    /// Draws `X_{t+1}` given `X_t = state`.
    fn next_state<R: Rng + ?Sized>(&self, state: u64, rng: &mut R) -> u64;
    /// Probability of moving from `from` to `to` in one step.
    fn transition_prob(&self, from: u64, to: u64) -> f64;
    /// Stationary probability of `state`.
    fn equilibrium(&self, state: u64) -> f64;
    fn is_on(&self, state: u64) -> bool;
}

/// The first `n` states visited after `warmup` steps from state 0.
pub fn state_path<C: OnOffChain + ?Sized, R: Rng + ?Sized>(chain: &C, n: usize, warmup: u64, rng: &mut R) -> Vec<u64> {
    let mut state = 0;
    for _ in 0..warmup {
        state = chain.next_state(state, rng);
    }
    let mut path = Vec::with_capacity(n);
    for _ in 0..n {
        path.push(state);
        state = chain.next_state(state, rng);
    }
    path
}

fn chain_series<C: OnOffChain + ?Sized, R: Rng + ?Sized>(chain: &C, n: usize, warmup: u64, rng: &mut R) -> BinarySeries {
    let mut state = 0;
    for _ in 0..warmup {
        state = chain.next_state(state, rng);
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(u8::from(chain.is_on(state)));
        state = chain.next_state(state, rng);
    }
    BinarySeries::from_bits_unchecked(values)
}

/// Any of the supported sources.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Wang(WangParams),
    CleggDodson(CleggDodsonParams),
    Psst(PsstParams),
    ArrowsmithBarenco(ArrowsmithBarencoParams),
    Fgn(FgnParams),
    Bernoulli(BernoulliParams),
}

impl Model {
    /// Long-run fraction of on slots.
    pub fn mean(&self) -> f64 {
        match self {
            Model::Wang(p) => p.mean(),
            Model::CleggDodson(p) => p.mean(),
            Model::Psst(p) => p.mean(),
            Model::ArrowsmithBarenco(p) => p.mean(),
            Model::Fgn(p) => p.mu(),
            Model::Bernoulli(p) => p.mu(),
        }
    }

    /// Short lowercase name used in file names and manifests.
    pub fn name(&self) -> &'static str {
        match self {
            Model::Wang(_) => "wang",
            Model::CleggDodson(_) => "clegg-dodson",
            Model::Psst(p) => match p.variant() {
                PsstVariant::A => "psst-a",
                PsstVariant::B => "psst-b",
            },
            Model::ArrowsmithBarenco(_) => "arrowsmith-barenco",
            Model::Fgn(_) => "fgn",
            Model::Bernoulli(_) => "bernoulli",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Wang(p) => write!(f, "wang a={} alpha={}", p.a(), p.alpha()),
            Model::CleggDodson(p) => write!(f, "clegg-dodson pi0={} alpha={}", p.pi0(), p.alpha()),
            Model::Psst(p) => write!(f, "{} a={} q={}", self.name(), p.a(), p.q()),
            Model::ArrowsmithBarenco(p) => write!(
                f,
                "arrowsmith-barenco s_left={} s_right={} support={}/{}",
                p.left().mean(),
                p.right().mean(),
                p.left().max_support(),
                p.right().max_support()
            ),
            Model::Fgn(p) => write!(f, "fgn hurst={} mu={}", p.hurst(), p.mu()),
            Model::Bernoulli(p) => write!(f, "bernoulli mu={}", p.mu()),
        }
    }
}

/// Warm-up length and RNG stream for [`generate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateOptions {
    pub warmup: u64,
    pub stream: u64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self { warmup: DEFAULT_WARMUP, stream: 0 }
    }
}

/// `n` slots of `model` for `seed`, after the default warm-up.
///
/// ```
/// use onoff::models::{generate, BernoulliParams, Model};
///
/// let model = Model::Bernoulli(BernoulliParams::new(1.0).unwrap());
/// let series = generate(&model, 5, 42).unwrap();
/// assert_eq!(series.to_text(), "11111");
/// ```
pub fn generate(model: &Model, n: usize, seed: u64) -> Result<BinarySeries, ModelError> {
    generate_with(model, n, seed, GenerateOptions::default())
}

pub fn generate_with(model: &Model, n: usize, seed: u64, opts: GenerateOptions) -> Result<BinarySeries, ModelError> {
    if n == 0 {
        return Err(ModelError::EmptySeries);
    }
    let mut rng: SimRng = seeded_stream(seed, opts.stream);
    let series = match model {
        Model::Wang(p) => chain_series(p, n, opts.warmup, &mut rng),
        Model::CleggDodson(p) => chain_series(p, n, opts.warmup, &mut rng),
        Model::Psst(p) => chain_series(p, n, opts.warmup, &mut rng),
        Model::ArrowsmithBarenco(p) => p.generate(n, opts.warmup, &mut rng),
        Model::Fgn(p) => p.generate(n, &mut rng)?,
        Model::Bernoulli(p) => p.generate(n, &mut rng),
    };
    Ok(series)
}
