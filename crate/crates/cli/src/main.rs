use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use onoff::harness::{
    compare_runs, generate_source, read_sweep_table, run_experiment, segment_analysis, write_comparison_csv,
    write_segments_csv, HarnessError, Profile, Settings, SweepTable,
};
use onoff::hurst::{bin_series, estimate_all, report_rows, write_hurst_csv, BinUnit};
use onoff::psst_tail::{heavy_tail_probe, loglog_table, write_tail_csv, ChainLength, PsstTail};
use onoff::queue::{
    binary_to_trace, default_occupancies, digitise, simulate_queue, write_departures_csv, write_sweep_csv,
    DigitiserConfig, QueueConfig, SweepPoint,
};
use onoff::trace::{load_trace_first, save_trace, PacketTrace, TraceFormat};

const OUT_DIR_ENV: &str = "ONOFF_OUT_DIR";

#[derive(Parser)]
#[command(name = "onoff", version, about = "On/off traffic models, queue sweeps and Hurst estimates")]
struct Cli {
    /// Directory for output files [env: ONOFF_OUT_DIR] [default: onoff-out]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a model's traffic as a packet trace or a 0/1 series
    Generate(GenerateArgs),
    /// Queue a trace through a FIFO link of one bandwidth
    Queue(QueueArgs),
    /// Re-send a trace as fixed-length packets on the slot grid
    Digitise(DigitiseArgs),
    /// Run the full pipeline: source, occupancy sweep and Hurst tables
    Sweep(SweepArgs),
    /// Estimate the Hurst parameter of a trace five ways
    Hurst(HurstArgs),
    /// Exact PSST first-return tails
    PsstTail(PsstTailArgs),
    /// Merge the sweep tables of several runs by occupancy
    Compare(CompareArgs),
    /// Sweep consecutive segments of a trace at the first segment's bandwidths
    Segments(SegmentArgs),
}

/// Settings shared by every command that builds an experiment
/// configuration; each maps to the configuration key of the same name.
#[derive(Args, Default)]
struct SourceArgs {
    /// Configuration file of `key = value` lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// bellcore or caida
    #[arg(long)]
    profile: Option<String>,
    /// wang, clegg-dodson, psst-a, psst-b, arrowsmith-barenco, fgn or bernoulli
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    hurst: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    pi0: Option<String>,
    /// Trace whose run lengths fit arrowsmith-barenco
    #[arg(long)]
    fit_trace: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    warmup: Option<String>,
    /// Generate about this many packets
    #[arg(long)]
    packets: Option<String>,
    /// Seconds of traffic to generate when --packets is absent
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    packet_bits: Option<String>,
    /// Link bandwidth in bits per second
    #[arg(long)]
    bandwidth: Option<String>,
    /// Trace format: seconds-bits or seconds-bytes
    #[arg(long)]
    format: Option<String>,
    /// Read only the first N packets
    #[arg(long)]
    first: Option<String>,
}

impl SourceArgs {
    fn settings(&self, extra: &[(&str, Option<&String>)]) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::new(),
        };
        let flags = [
            ("profile", &self.profile),
            ("model", &self.model),
            ("mu", &self.mu),
            ("hurst", &self.hurst),
            ("alpha", &self.alpha),
            ("a", &self.a),
            ("q", &self.q),
            ("pi0", &self.pi0),
            ("fit_trace", &self.fit_trace),
            ("seed", &self.seed),
            ("warmup", &self.warmup),
            ("packets", &self.packets),
            ("horizon", &self.horizon),
            ("packet_bits", &self.packet_bits),
            ("bandwidth", &self.bandwidth),
            ("format", &self.format),
            ("first", &self.first),
        ];
        for (k, v) in flags.iter().map(|(k, v)| (*k, v.as_ref())).chain(extra.iter().copied()) {
            if let Some(v) = v {
                s.set(k, v)?;
            }
        }
        Ok(s)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Write the 0/1 slot series instead of a packet trace
    #[arg(long)]
    binary: bool,
    /// Output file [default: <out-dir>/trace.txt or series.txt]
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A trace file and how to read it.
#[derive(Args)]
struct InputArgs {
    /// Packet trace, one "time length" record per line
    #[arg(long)]
    input: PathBuf,
    /// seconds-bits or seconds-bytes
    #[arg(long, default_value = "seconds-bits")]
    format: String,
    /// Read only the first N packets
    #[arg(long)]
    first: Option<usize>,
}

impl InputArgs {
    fn format(&self) -> Result<TraceFormat, CliError> {
        self.format.parse().map_err(|e| CliError::Validation(format!("--format: {e}")))
    }

    fn load(&self) -> Result<PacketTrace, CliError> {
        if self.first == Some(0) {
            return Err(CliError::Validation("--first must be positive".into()));
        }
        load_trace_first(&self.input, self.format()?, self.first).map_err(|e| runtime("load", e))
    }
}

#[derive(Args)]
struct QueueArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Link bandwidth in bits per second
    #[arg(long)]
    bandwidth: f64,
    /// End of the averaging window in seconds [default: the trace's span]
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Args)]
struct DigitiseArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Fixed packet length in bits [default: profile]
    #[arg(long)]
    packet_bits: Option<u64>,
    /// Bandwidth that sets the slot l / b [default: profile]
    #[arg(long)]
    bandwidth: Option<f64>,
    /// bellcore or caida
    #[arg(long, default_value = "bellcore")]
    profile: String,
    /// Output file [default: <out-dir>/digitised.txt]
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Trace to analyse instead of a model
    #[arg(long)]
    input: Option<String>,
    /// Comma-separated occupancy targets in (0, 1)
    #[arg(long)]
    occupancies: Option<String>,
    /// Comma-separated Hurst bin widths in seconds
    #[arg(long)]
    bins: Option<String>,
    /// Skip the digitised stream for trace input
    #[arg(long)]
    no_digitise: bool,
}

#[derive(Args)]
struct HurstArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated bin widths in seconds
    #[arg(long, default_value = "0.1,0.01,0.001")]
    bins: String,
    /// Sum bits or count packets per bin
    #[arg(long, default_value = "bits")]
    unit: String,
}

#[derive(Args)]
struct PsstTailArgs {
    /// Exact decimal or fraction, e.g. 20.8 or 104/5
    #[arg(long)]
    a: String,
    #[arg(long)]
    q: String,
    /// Number of non-zero states, or "inf"
    #[arg(long, default_value = "inf")]
    n: String,
    /// Largest k in the table
    #[arg(long, default_value_t = 100)]
    k_max: u64,
    /// Print P(k) e^(epsilon k) for k in [--k-from, --k-max] instead
    #[arg(long)]
    probe: Option<f64>,
    #[arg(long, default_value_t = 0)]
    k_from: u64,
}

#[derive(Args)]
struct CompareArgs {
    /// Run directories or sweep CSVs, optionally as label=path
    #[arg(required = true, num_args = 2..)]
    runs: Vec<String>,
    /// Sweep table to read from each run directory
    #[arg(long, default_value = "sweep.csv")]
    table: String,
    /// Output file [default: <out-dir>/compare.csv]
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Packets per segment
    #[arg(long)]
    segment_size: usize,
    /// Use at most this many segments
    #[arg(long)]
    segments: Option<usize>,
    /// Comma-separated occupancy targets for the first segment
    #[arg(long)]
    occupancies: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

fn runtime(stage: &str, e: impl fmt::Display) -> CliError {
    CliError::Runtime(format!("{stage}: {e}"))
}

fn invalid(flag: &str, e: impl fmt::Display) -> CliError {
    CliError::Validation(format!("{flag}: {e}"))
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| invalid(flag, format!("{x:?}: {e}")))).collect()
}

fn out_dir(cli: &Option<PathBuf>) -> PathBuf {
    cli.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("onoff-out"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| runtime("output", e))?;
    }
    fs::write(path, bytes).map_err(|e| runtime("output", format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Validation(_) => 1,
                CliError::Runtime(_) => 2,
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = out_dir(&cli.out_dir);
    match cli.command {
        Command::Generate(args) => generate(args, &out),
        Command::Queue(args) => queue(args, &out),
        Command::Digitise(args) => digitise_cmd(args, &out),
        Command::Sweep(args) => sweep(args, &out),
        Command::Hurst(args) => hurst(args, &out),
        Command::PsstTail(args) => psst_tail(args, &out),
        Command::Compare(args) => compare(args, &out),
        Command::Segments(args) => segments(args, &out),
    }
}

fn generate(args: GenerateArgs, out: &Path) -> Result<(), CliError> {
    let cfg = args.source.settings(&[])?.to_config()?;
    let (model, series) = generate_source(&cfg)?;
    let link = cfg.link()?;
    let path = args.output.unwrap_or_else(|| out.join(if args.binary { "series.txt" } else { "trace.txt" }));
    if args.binary {
        let mut text = series.to_text();
        text.push('\n');
        write_file(&path, text.as_bytes())?;
    } else {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| runtime("output", e))?;
        }
        save_trace(&binary_to_trace(&series, link), &path, cfg.format).map_err(|e| runtime("output", e))?;
    }
    println!("{model}: {} slots, {} packets, mean {:.6}", series.len(), series.ones(), series.mean());
    println!("wrote {}", path.display());
    Ok(())
}

fn queue(args: QueueArgs, out: &Path) -> Result<(), CliError> {
    let trace = args.input.load()?;
    let cfg = QueueConfig::new(args.bandwidth).map_err(|e| invalid("--bandwidth", e))?;
    let horizon = args.horizon.unwrap_or_else(|| trace.span());
    let run = simulate_queue(&trace, cfg, horizon).map_err(|e| runtime("queue", e))?;
    let point = SweepPoint { occupancy: run.stats.occupancy, bandwidth: args.bandwidth, stats: run.stats.clone() };
    let mut buf = Vec::new();
    write_sweep_csv(&[point], &mut buf).map_err(|e| runtime("output", e))?;
    write_file(&out.join("queue.csv"), &buf)?;
    let mut buf = Vec::new();
    write_departures_csv(&run.departures, &mut buf).map_err(|e| runtime("output", e))?;
    write_file(&out.join("departures.csv"), &buf)?;
    let s = &run.stats;
    println!("occupancy {:.6}", s.occupancy);
    println!("mean queue {:.6} packets, {:.3} bits", s.mean_q_packets, s.mean_q_bits);
    println!("mean delay {:.9} s", s.mean_delay);
    println!("P(Q >= 5) {:.6}, P(Q >= 20) {:.6}", s.p_ge(5), s.p_ge(20));
    Ok(())
}

fn digitise_cmd(args: DigitiseArgs, out: &Path) -> Result<(), CliError> {
    let profile = Profile::by_name(&args.profile).ok_or_else(|| invalid("--profile", &args.profile))?;
    let link = DigitiserConfig::from_bandwidth(
        args.packet_bits.unwrap_or(profile.packet_bits),
        args.bandwidth.unwrap_or(profile.bandwidth),
    )
    .map_err(|e| invalid("--bandwidth", e))?;
    let format = args.input.format()?;
    let trace = args.input.load()?;
    let d = digitise(&trace, link);
    let path = args.output.unwrap_or_else(|| out.join("digitised.txt"));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| runtime("output", e))?;
    }
    save_trace(&d, &path, format).map_err(|e| runtime("output", e))?;
    println!(
        "{} packets in, {} packets of {} bits out, residue {} bits",
        trace.len(),
        d.len(),
        link.packet_bits(),
        trace.total_bits() - d.total_bits()
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn sweep(args: SweepArgs, out: &Path) -> Result<(), CliError> {
    let no = "false".to_string();
    let extra = [
        ("trace", args.input.as_ref()),
        ("occupancies", args.occupancies.as_ref()),
        ("bins", args.bins.as_ref()),
        ("digitise", args.no_digitise.then_some(&no)),
    ];
    let cfg = args.source.settings(&extra)?.to_config()?;
    let bundle = run_experiment(&cfg, out)?;
    for v in &bundle.variants {
        println!("{}: {} packets", v.name, v.trace.len());
        for p in &v.sweep {
            println!("  occupancy {:.3}  mean queue {:.4}", p.occupancy, p.stats.mean_q_packets);
        }
    }
    for f in &bundle.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn hurst(args: HurstArgs, out: &Path) -> Result<(), CliError> {
    let unit = match args.unit.to_ascii_lowercase().as_str() {
        "bits" => BinUnit::Bits,
        "packets" => BinUnit::Packets,
        other => return Err(invalid("--unit", format!("{other:?} is not bits or packets"))),
    };
    let widths = parse_list("--bins", &args.bins)?;
    let trace = args.input.load()?;
    let label = args.input.input.display().to_string();
    let mut rows = Vec::new();
    for w in widths {
        let binned = bin_series(&trace, w, unit).map_err(|e| invalid("--bins", e))?;
        let report = estimate_all(&binned);
        println!("bin {w} s ({} bins)", binned.counts.len());
        for row in report_rows(&label, w, &report) {
            match &row.result {
                Ok(e) => println!("  {:<14} H = {:.4}", row.method.name(), e.h),
                Err(e) => println!("  {:<14} failed: {e}", row.method.name()),
            }
            rows.push(row);
        }
    }
    let mut buf = Vec::new();
    write_hurst_csv(&rows, &mut buf).map_err(|e| runtime("output", e))?;
    write_file(&out.join("hurst.csv"), &buf)
}

fn psst_tail(args: PsstTailArgs, out: &Path) -> Result<(), CliError> {
    let tail = PsstTail::from_decimal(&args.a, &args.q).map_err(|e| invalid("--a/--q", e))?;
    let n = match args.n.as_str() {
        "inf" | "infinite" => ChainLength::Infinite,
        s => ChainLength::Finite(s.parse::<u64>().ok().filter(|&n| n > 0).ok_or_else(|| invalid("--n", s))?),
    };
    if let Some(eps) = args.probe {
        if args.k_from > args.k_max {
            return Err(invalid("--k-from", "exceeds --k-max"));
        }
        let rows = heavy_tail_probe(&tail, n, eps, args.k_from..=args.k_max).map_err(|e| invalid("--probe", e))?;
        let mut text = String::from("k,scaled_tail\n");
        for (k, v) in rows {
            text.push_str(&format!("{k},{v}\n"));
        }
        write_file(&out.join("psst_probe.csv"), text.as_bytes())?;
        println!("wrote {}", out.join("psst_probe.csv").display());
        return Ok(());
    }
    let rows = loglog_table(&tail, n, args.k_max).map_err(|e| invalid("--k-max", e))?;
    for r in rows.iter().take(6) {
        println!("P({}) = {}", r.k, r.tail);
    }
    let mut buf = Vec::new();
    write_tail_csv(&rows, &mut buf).map_err(|e| runtime("output", e))?;
    write_file(&out.join("psst_tail.csv"), &buf)?;
    println!("wrote {}", out.join("psst_tail.csv").display());
    Ok(())
}

fn compare(args: CompareArgs, out: &Path) -> Result<(), CliError> {
    let mut tables = Vec::with_capacity(args.runs.len());
    for spec in &args.runs {
        let (label, path) = match spec.split_once('=') {
            Some((l, p)) => (l.to_string(), PathBuf::from(p)),
            None => {
                let p = PathBuf::from(spec);
                let name = p.file_stem().map_or_else(|| spec.clone(), |s| s.to_string_lossy().into_owned());
                (name, p)
            }
        };
        let file = if path.is_dir() { path.join(&args.table) } else { path };
        let mut label = label;
        let base = label.clone();
        let mut i = 2;
        while tables.iter().any(|t: &SweepTable| t.label == label) {
            label = format!("{base}_{i}");
            i += 1;
        }
        tables.push(read_sweep_table(&file, &label)?);
    }
    let merged = compare_runs(&tables)?;
    let mut buf = Vec::new();
    write_comparison_csv(&merged, &mut buf)?;
    let path = args.output.unwrap_or_else(|| out.join("compare.csv"));
    write_file(&path, &buf)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn segments(args: SegmentArgs, out: &Path) -> Result<(), CliError> {
    let occupancies = match &args.occupancies {
        Some(t) => parse_list("--occupancies", t)?,
        None => default_occupancies(),
    };
    let trace = args.input.load()?;
    let segs = segment_analysis(&trace, args.segment_size, args.segments, &occupancies)?;
    let mut buf = Vec::new();
    write_segments_csv(&segs, &mut buf)?;
    write_file(&out.join("segments.csv"), &buf)?;
    for s in &segs {
        let mut buf = Vec::new();
        write_sweep_csv(&s.points, &mut buf).map_err(|e| runtime("output", e))?;
        write_file(&out.join(format!("segment_{}.csv", s.index + 1)), &buf)?;
        let p = &s.points[0];
        println!(
            "segment {}: {} packets over {:.6} s, occupancy {:.4} at target {}",
            s.index + 1,
            s.packets,
            s.span,
            p.stats.occupancy,
            p.occupancy
        );
    }
    println!("wrote {}", out.join("segments.csv").display());
    Ok(())
}
