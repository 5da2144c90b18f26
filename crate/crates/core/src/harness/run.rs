use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::hurst::{bin_series, estimate_all, report_rows, write_hurst_csv, HurstRow};
use crate::models::{generate_with, BinarySeries, GenerateOptions, Model};
use crate::queue::{
    binary_to_trace, digitise, occupancy_sweep, simulate_queue, write_exceedance_csv, write_sweep_csv, QueueConfig,
    SweepPoint,
};
use crate::trace::{load_trace_first, PacketTrace};

use super::{at, ExperimentConfig, HarnessError, Source};

/// Results for one traffic stream of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    /// `raw`, `digitised` or the model name.
    pub name: String,
    pub trace: PacketTrace,
    pub sweep: Vec<SweepPoint>,
    pub hurst: Vec<HurstRow>,
}

/// What [`run_experiment`] wrote, and the numbers behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunBundle {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub variants: Vec<VariantResult>,
}

impl RunBundle {
    pub fn variant(&self, name: &str) -> Option<&VariantResult> {
        self.variants.iter().find(|v| v.name == name)
    }
}

/// Builds the configured model and generates its slots: enough for
/// `packets` packets on average, or `horizon / dt` slots.
pub fn generate_source(cfg: &ExperimentConfig) -> Result<(Model, BinarySeries), HarnessError> {
    let Source::Model(spec) = &cfg.source else {
        return Err(HarnessError::config("model", "the source is a trace, not a model"));
    };
    let link = cfg.link()?;
    let model = spec.build(link, cfg.format)?;
    let slots = match cfg.packets {
        Some(p) => (p as f64 / model.mean()).ceil(),
        None => (cfg.horizon / link.slot()).round(),
    };
    if !(slots >= 1.0 && slots < usize::MAX as f64) {
        return Err(HarnessError::config("packets", format!("gives {slots} slots")));
    }
    let opts = GenerateOptions { warmup: cfg.warmup, stream: 0 };
    let series = generate_with(&model, slots as usize, cfg.seed, opts).map_err(at("generate"))?;
    Ok((model, series))
}

/// Runs the whole pipeline and writes its tables into `out_dir`.
///
/// A model is generated for `packets` packets (or `horizon` seconds) and
/// laid on the slot grid `l / b`. A trace is first queued at `b`; its
/// departures are the `raw` stream, and digitising them gives `digitised`.
/// Each stream is swept over the occupancy targets and binned at every
/// width for Hurst estimation.
///
/// Files: `sweep.csv` and `exceedance.csv` for the first stream,
/// `sweep_<name>.csv` and `exceedance_<name>.csv` for any others,
/// `hurst.csv` for all of them, and `manifest.txt`, which loads back as a
/// configuration reproducing the run.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunBundle, HarnessError> {
    cfg.validate()?;
    let link = cfg.link()?;
    let mut derived = String::new();
    let streams: Vec<(String, PacketTrace)> = match &cfg.source {
        Source::Model(_) => {
            let (model, series) = generate_source(cfg)?;
            let _ = writeln!(derived, "# source: {model}");
            let _ = writeln!(derived, "# model mean: {}", model.mean());
            let _ = writeln!(derived, "# slots: {} ({} on)", series.len(), series.ones());
            vec![(model.name().to_string(), binary_to_trace(&series, link))]
        }
        Source::Trace(path) => {
            let input = load_trace_first(path, cfg.format, cfg.first).map_err(at("load"))?;
            if input.is_empty() {
                return Err(HarnessError::Stage { stage: "load", message: "trace is empty".into() });
            }
            let baseline = QueueConfig::new(cfg.bandwidth).map_err(at("baseline queue"))?;
            let run = simulate_queue(&input, baseline, input.span()).map_err(at("baseline queue"))?;
            let _ = writeln!(derived, "# source: {} ({} packets)", path.display(), input.len());
            let _ = writeln!(derived, "# baseline occupancy: {}", run.stats.occupancy);
            let mut streams = vec![("raw".to_string(), run.departures)];
            if cfg.digitise {
                let d = digitise(&streams[0].1, link);
                streams.push(("digitised".to_string(), d));
            }
            streams
        }
    };
    let _ = writeln!(derived, "# slot: {} s", link.slot());

    let mut variants = Vec::with_capacity(streams.len());
    for (name, trace) in streams {
        let sweep = occupancy_sweep(&trace, &cfg.occupancies).map_err(at("sweep"))?;
        let mut hurst = Vec::new();
        for &w in &cfg.bin_widths {
            let binned = bin_series(&trace, w, cfg.hurst_unit).map_err(at("hurst"))?;
            hurst.extend(report_rows(&name, w, &estimate_all(&binned)));
        }
        let _ = writeln!(
            derived,
            "# stream {name}: {} packets, {} bits over {} s",
            trace.len(),
            trace.total_bits(),
            trace.span()
        );
        variants.push(VariantResult { name, trace, sweep, hurst });
    }

    let mut outputs: Vec<(String, Vec<u8>)> = Vec::new();
    for (i, v) in variants.iter().enumerate() {
        let suffix = if i == 0 { String::new() } else { format!("_{}", v.name) };
        let mut buf = Vec::new();
        write_sweep_csv(&v.sweep, &mut buf).map_err(at("output"))?;
        outputs.push((format!("sweep{suffix}.csv"), buf));
        let mut buf = Vec::new();
        write_exceedance_csv(&v.sweep, &mut buf).map_err(at("output"))?;
        outputs.push((format!("exceedance{suffix}.csv"), buf));
    }
    let rows: Vec<HurstRow> = variants.iter().flat_map(|v| v.hurst.iter().cloned()).collect();
    let mut buf = Vec::new();
    write_hurst_csv(&rows, &mut buf).map_err(at("output"))?;
    outputs.push(("hurst.csv".to_string(), buf));

    let mut manifest = format!("# onoff {}\n", env!("CARGO_PKG_VERSION"));
    manifest.push_str(&cfg.to_settings_text());
    manifest.push_str(&derived);
    for (name, _) in &outputs {
        let _ = writeln!(manifest, "# output: {name}");
    }
    outputs.push(("manifest.txt".to_string(), manifest.into_bytes()));

    fs::create_dir_all(out_dir).map_err(at("output"))?;
    let mut files = Vec::with_capacity(outputs.len());
    for (name, bytes) in outputs {
        let path = out_dir.join(name);
        fs::write(&path, bytes).map_err(at("output"))?;
        files.push(path);
    }

    Ok(RunBundle { out_dir: out_dir.to_path_buf(), files, variants })
}
