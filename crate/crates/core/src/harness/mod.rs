//! Experiment orchestration: configuration, the generate/queue/sweep/Hurst
//! pipeline, run comparison and segment analysis.
//!
//! A configuration is a plain text file of `key = value` lines, `#` starting
//! a comment. Every key is optional except the source (`model` or `trace`).
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `profile` | `bellcore` or `caida`; sets `packet_bits`, `bandwidth`, `horizon`, `bins` | `bellcore` |
//! | `model` | `wang`, `clegg-dodson`, `psst-a`, `psst-b`, `arrowsmith-barenco`, `fgn`, `bernoulli` | |
//! | `mu`, `hurst`, `alpha`, `a`, `q`, `pi0` | model parameters | |
//! | `fit_trace` | trace whose run lengths fit `arrowsmith-barenco` | |
//! | `trace` | packet trace to analyse instead of a model | |
//! | `format` | `seconds-bits` or `seconds-bytes` | `seconds-bits` |
//! | `first` | read only this many packets | all |
//! | `seed` | RNG seed | 1 |
//! | `warmup` | chain steps discarded before recording | 10000 |
//! | `packets` | generate until about this many packets | |
//! | `horizon` | seconds to generate when `packets` is unset | profile |
//! | `packet_bits`, `bandwidth` | `l` and `b`; the slot is `l / b` | profile |
//! | `occupancies` | comma-separated targets in (0, 1) | 0.10, 0.15, ..., 0.60 |
//! | `bins` | comma-separated Hurst bin widths in seconds | profile |
//! | `hurst_unit` | `bits` or `packets` | `bits` |
//! | `digitise` | also analyse the digitised version of a trace | `true` |

mod compare;
mod run;
mod segments;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

pub use compare::{compare_runs, read_sweep_table, write_comparison_csv, SweepTable};
pub use run::{generate_source, run_experiment, RunBundle, VariantResult};
pub use segments::{segment_analysis, segment_spread, write_segments_csv, SegmentSweep};

use crate::hurst::BinUnit;
use crate::models::{
    ArrowsmithBarencoParams, BernoulliParams, CleggDodsonParams, FgnParams, Model, ModelError, PsstParams,
    PsstVariant, WangParams, DEFAULT_WARMUP,
};
use crate::queue::{default_occupancies, digitise, trace_to_binary, DigitiserConfig};
use crate::trace::{load_trace_first, TraceFormat};

/// Anything that stops an experiment.
///
/// [`HarnessError::Config`] is raised before any work starts;
/// [`HarnessError::Stage`] names the pipeline step that failed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {key}: {reason}")]
    Config { key: String, reason: String },
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl HarnessError {
    pub fn config(key: impl Into<String>, reason: impl fmt::Display) -> Self {
        HarnessError::Config { key: key.into(), reason: reason.to_string() }
    }

    pub fn is_validation(&self) -> bool {
        matches!(self, HarnessError::Config { .. })
    }
}

pub(crate) fn at<E: fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> HarnessError {
    move |e| HarnessError::Stage { stage, message: e.to_string() }
}

/// Link and horizon defaults for one of the two reference datasets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub name: &'static str,
    pub packet_bits: u64,
    pub bandwidth: f64,
    pub horizon: f64,
    pub bins: [f64; 3],
}

pub const BELLCORE: Profile =
    Profile { name: "bellcore", packet_bits: 464, bandwidth: 1.96e6, horizon: 252.0, bins: [0.1, 0.01, 0.001] };

pub const CAIDA: Profile =
    Profile { name: "caida", packet_bits: 496, bandwidth: 1.28e8, horizon: 4.02, bins: [1e-3, 1e-4, 1e-5] };

impl Profile {
    pub fn by_name(name: &str) -> Option<Profile> {
        [BELLCORE, CAIDA].into_iter().find(|p| p.name == name.to_ascii_lowercase())
    }
}

/// The source models by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Wang,
    CleggDodson,
    PsstA,
    PsstB,
    ArrowsmithBarenco,
    Fgn,
    Bernoulli,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Wang,
        ModelKind::CleggDodson,
        ModelKind::PsstA,
        ModelKind::PsstB,
        ModelKind::ArrowsmithBarenco,
        ModelKind::Fgn,
        ModelKind::Bernoulli,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Wang => "wang",
            ModelKind::CleggDodson => "clegg-dodson",
            ModelKind::PsstA => "psst-a",
            ModelKind::PsstB => "psst-b",
            ModelKind::ArrowsmithBarenco => "arrowsmith-barenco",
            ModelKind::Fgn => "fgn",
            ModelKind::Bernoulli => "bernoulli",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        let alias = match s.as_str() {
            "cd" => "clegg-dodson",
            "ab" => "arrowsmith-barenco",
            "poisson" => "bernoulli",
            other => other,
        };
        ModelKind::ALL.into_iter().find(|k| k.name() == alias)
    }
}

/// A model named in a configuration, with whichever parameters were given.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelSpec {
    pub kind: Option<ModelKind>,
    pub mu: Option<f64>,
    pub hurst: Option<f64>,
    pub alpha: Option<f64>,
    pub a: Option<f64>,
    pub q: Option<f64>,
    pub pi0: Option<f64>,
    pub fit_trace: Option<PathBuf>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self { kind: Some(kind), ..Self::default() }
    }

    fn need(&self, key: &'static str, v: Option<f64>) -> Result<f64, HarnessError> {
        v.ok_or_else(|| HarnessError::config(key, format!("required by model {}", self.kind_name())))
    }

    fn kind_name(&self) -> &'static str {
        self.kind.map_or("?", ModelKind::name)
    }

    /// `alpha` directly, or `2 (1 - hurst)`.
    fn tail_alpha(&self) -> Result<f64, HarnessError> {
        match (self.alpha, self.hurst) {
            (Some(a), _) => Ok(a),
            (None, Some(h)) => Ok(2.0 * (1.0 - h)),
            (None, None) => Err(HarnessError::config("hurst", format!("hurst or alpha is required by model {}", self.kind_name()))),
        }
    }

    /// Builds the model; `fit_trace` is read and digitised with `link`.
    pub fn build(&self, link: DigitiserConfig, format: TraceFormat) -> Result<Model, HarnessError> {
        let kind = self.kind.ok_or_else(|| HarnessError::config("model", "no model given"))?;
        let invalid = |e: ModelError| HarnessError::config(kind.name(), e);
        Ok(match kind {
            ModelKind::Bernoulli => Model::Bernoulli(BernoulliParams::new(self.need("mu", self.mu)?).map_err(invalid)?),
            ModelKind::Fgn => {
                Model::Fgn(FgnParams::new(self.need("hurst", self.hurst)?, self.need("mu", self.mu)?).map_err(invalid)?)
            }
            ModelKind::Wang => {
                let alpha = self.tail_alpha()?;
                let a = match self.a {
                    Some(a) => a,
                    None => crate::models::wang_fit_a(self.need("mu", self.mu)?, alpha).map_err(invalid)?,
                };
                Model::Wang(WangParams::new(a, alpha).map_err(invalid)?)
            }
            ModelKind::CleggDodson => {
                let alpha = self.tail_alpha()?;
                let pi0 = match (self.pi0, self.mu) {
                    (Some(p), _) => p,
                    (None, Some(mu)) => 1.0 - mu,
                    (None, None) => return Err(HarnessError::config("mu", "mu or pi0 is required by model clegg-dodson")),
                };
                Model::CleggDodson(CleggDodsonParams::new(pi0, alpha).map_err(invalid)?)
            }
            ModelKind::PsstA | ModelKind::PsstB => {
                let variant = if kind == ModelKind::PsstA { PsstVariant::A } else { PsstVariant::B };
                let q = match self.q {
                    Some(q) => q,
                    None => PsstParams::fit_q(self.need("mu", self.mu)?, variant).map_err(invalid)?,
                };
                Model::Psst(PsstParams::new(self.need("a", self.a)?, q, variant).map_err(invalid)?)
            }
            ModelKind::ArrowsmithBarenco => {
                let path = self
                    .fit_trace
                    .as_ref()
                    .ok_or_else(|| HarnessError::config("fit_trace", "required by model arrowsmith-barenco"))?;
                let trace = load_trace_first(path, format, None).map_err(|e| HarnessError::config("fit_trace", e))?;
                let series = trace_to_binary(&digitise(&trace, link), link).map_err(at("fit"))?;
                let runs = series.run_lengths();
                Model::ArrowsmithBarenco(ArrowsmithBarencoParams::fit_from_empirical(&runs.on, &runs.off).map_err(invalid)?)
            }
        })
    }
}

/// Where the packets come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Model(ModelSpec),
    Trace(PathBuf),
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: Source,
    pub profile: Profile,
    pub format: TraceFormat,
    pub first: Option<usize>,
    pub seed: u64,
    pub warmup: u64,
    pub packets: Option<u64>,
    pub horizon: f64,
    pub packet_bits: u64,
    pub bandwidth: f64,
    pub occupancies: Vec<f64>,
    pub bin_widths: Vec<f64>,
    pub hurst_unit: BinUnit,
    pub digitise: bool,
}

/// Keys recognised in configuration files and overrides.
pub const CONFIG_KEYS: [&str; 22] = [
    "profile",
    "model",
    "mu",
    "hurst",
    "alpha",
    "a",
    "q",
    "pi0",
    "fit_trace",
    "trace",
    "format",
    "first",
    "seed",
    "warmup",
    "packets",
    "horizon",
    "packet_bits",
    "bandwidth",
    "occupancies",
    "bins",
    "hurst_unit",
    "digitise",
];

/// Raw `key = value` settings, later entries overriding earlier ones.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses configuration text.
    ///
    /// ```
    /// use onoff::harness::Settings;
    ///
    /// let s = Settings::parse("# Bellcore-like\nmodel = wang\nmu = 0.094 # on-fraction\n").unwrap();
    /// assert_eq!(s.get("mu"), Some("0.094"));
    /// ```
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut s = Self::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::config(format!("line {}", n + 1), "expected key = value"))?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::config(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    /// Sets one key, rejecting unknown names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let key = key.replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(HarnessError::config(key, "unknown key"));
        }
        self.0.insert(key, value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn merge(&mut self, other: &Settings) {
        self.0.extend(other.0.iter().map(|(k, v)| (k.clone(), v.clone())));
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, HarnessError>
    where
        T::Err: fmt::Display,
    {
        self.get(key).map(|v| v.parse::<T>().map_err(|e| HarnessError::config(key, format!("{v:?}: {e}")))).transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, HarnessError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| HarnessError::config(key, format!("{x:?}: {e}"))))
                    .collect()
            })
            .transpose()
    }

    /// Resolves defaults and checks every value.
    pub fn to_config(&self) -> Result<ExperimentConfig, HarnessError> {
        let profile = match self.get("profile") {
            None => BELLCORE,
            Some(p) => Profile::by_name(p).ok_or_else(|| HarnessError::config("profile", format!("unknown profile {p:?}")))?,
        };
        let source = match (self.get("model"), self.get("trace")) {
            (Some(_), Some(_)) => return Err(HarnessError::config("trace", "give either model or trace, not both")),
            (None, None) => return Err(HarnessError::config("model", "a model or a trace is required")),
            (None, Some(t)) => Source::Trace(PathBuf::from(t)),
            (Some(m), None) => {
                let kind = ModelKind::parse(m).ok_or_else(|| HarnessError::config("model", format!("unknown model {m:?}")))?;
                Source::Model(ModelSpec {
                    kind: Some(kind),
                    mu: self.number("mu")?,
                    hurst: self.number("hurst")?,
                    alpha: self.number("alpha")?,
                    a: self.number("a")?,
                    q: self.number("q")?,
                    pi0: self.number("pi0")?,
                    fit_trace: self.get("fit_trace").map(PathBuf::from),
                })
            }
        };
        let format = match self.get("format") {
            None => TraceFormat::SecondsBits,
            Some(f) => f.parse().map_err(|e| HarnessError::config("format", e))?,
        };
        let hurst_unit = match self.get("hurst_unit").map(str::to_ascii_lowercase).as_deref() {
            None | Some("bits") => BinUnit::Bits,
            Some("packets") => BinUnit::Packets,
            Some(other) => return Err(HarnessError::config("hurst_unit", format!("{other:?} is not bits or packets"))),
        };
        let digitise = match self.get("digitise").map(str::to_ascii_lowercase).as_deref() {
            None | Some("true" | "yes" | "1" | "on") => true,
            Some("false" | "no" | "0" | "off") => false,
            Some(other) => return Err(HarnessError::config("digitise", format!("{other:?} is not a boolean"))),
        };
        let cfg = ExperimentConfig {
            source,
            profile,
            format,
            first: self.number("first")?,
            seed: self.number("seed")?.unwrap_or(1),
            warmup: self.number("warmup")?.unwrap_or(DEFAULT_WARMUP),
            packets: self.number("packets")?,
            horizon: self.number("horizon")?.unwrap_or(profile.horizon),
            packet_bits: self.number("packet_bits")?.unwrap_or(profile.packet_bits),
            bandwidth: self.number("bandwidth")?.unwrap_or(profile.bandwidth),
            occupancies: self.list("occupancies")?.unwrap_or_else(default_occupancies),
            bin_widths: self.list("bins")?.unwrap_or_else(|| profile.bins.to_vec()),
            hurst_unit,
            digitise,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    /// A model run with the Bellcore profile and default grids.
    pub fn for_model(spec: ModelSpec) -> Self {
        Self {
            source: Source::Model(spec),
            profile: BELLCORE,
            format: TraceFormat::SecondsBits,
            first: None,
            seed: 1,
            warmup: DEFAULT_WARMUP,
            packets: None,
            horizon: BELLCORE.horizon,
            packet_bits: BELLCORE.packet_bits,
            bandwidth: BELLCORE.bandwidth,
            occupancies: default_occupancies(),
            bin_widths: BELLCORE.bins.to_vec(),
            hurst_unit: BinUnit::Bits,
            digitise: true,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.packet_bits == 0 {
            return Err(HarnessError::config("packet_bits", "must be positive"));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(HarnessError::config("bandwidth", format!("{} must be positive", self.bandwidth)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(HarnessError::config("horizon", format!("{} must be positive", self.horizon)));
        }
        if self.packets == Some(0) {
            return Err(HarnessError::config("packets", "must be positive"));
        }
        if self.first == Some(0) {
            return Err(HarnessError::config("first", "must be positive"));
        }
        if self.occupancies.is_empty() {
            return Err(HarnessError::config("occupancies", "empty list"));
        }
        if let Some(o) = self.occupancies.iter().find(|&&o| !(o > 0.0 && o < 1.0)) {
            return Err(HarnessError::config("occupancies", format!("{o} is outside (0, 1)")));
        }
        if let Some(w) = self.bin_widths.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
            return Err(HarnessError::config("bins", format!("{w} must be positive")));
        }
        Ok(())
    }

    /// The slot grid `dt = l / b`.
    pub fn link(&self) -> Result<DigitiserConfig, HarnessError> {
        DigitiserConfig::from_bandwidth(self.packet_bits, self.bandwidth).map_err(|e| HarnessError::config("bandwidth", e))
    }

    /// The configuration as `key = value` lines that load back to the same
    /// run.
    pub fn to_settings_text(&self) -> String {
        let mut lines: Vec<(String, String)> = vec![("profile".into(), self.profile.name.into())];
        match &self.source {
            Source::Trace(p) => {
                lines.push(("trace".into(), p.display().to_string()));
                lines.push(("digitise".into(), self.digitise.to_string()));
            }
            Source::Model(m) => {
                lines.push(("model".into(), m.kind_name().into()));
                for (k, v) in [("mu", m.mu), ("hurst", m.hurst), ("alpha", m.alpha), ("a", m.a), ("q", m.q), ("pi0", m.pi0)] {
                    if let Some(v) = v {
                        lines.push((k.into(), v.to_string()));
                    }
                }
                if let Some(p) = &m.fit_trace {
                    lines.push(("fit_trace".into(), p.display().to_string()));
                }
            }
        }
        lines.push(("format".into(), self.format.to_string()));
        if let Some(f) = self.first {
            lines.push(("first".into(), f.to_string()));
        }
        lines.push(("seed".into(), self.seed.to_string()));
        lines.push(("warmup".into(), self.warmup.to_string()));
        if let Some(p) = self.packets {
            lines.push(("packets".into(), p.to_string()));
        }
        lines.push(("horizon".into(), self.horizon.to_string()));
        lines.push(("packet_bits".into(), self.packet_bits.to_string()));
        lines.push(("bandwidth".into(), self.bandwidth.to_string()));
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        lines.push(("occupancies".into(), join(&self.occupancies)));
        lines.push(("bins".into(), join(&self.bin_widths)));
        let unit = match self.hurst_unit {
            BinUnit::Bits => "bits",
            BinUnit::Packets => "packets",
        };
        lines.push(("hurst_unit".into(), unit.into()));
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
