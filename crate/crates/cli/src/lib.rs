//! Command-line front end: argument parsing, subcommand routing and run
//! manifests. `main` only forwards to [`dispatch`].

pub mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use myceliumsim::capacity::{format_sig, processor_count, CapacityError, DensitySpec, QUOTED_ESTIMATE_PER_M3};
use myceliumsim::ephys::{
    classify_trains, detect_spikes, generate_synthetic, load_recording, load_stimuli, spike_stats,
    spikes_to_csv, stimulation_latency, DetectorParams, EphysError, SpikeStats, SynthSpec,
    LONG_WIDTH_FLAG_S, REPORT_MIN_AMPLITUDE_MV,
};
use myceliumsim::growth::{grow, inoculate, GrowthConfig, GrowthError};
use myceliumsim::logic::{classify_function, realize_truth_table, LogicError, PortAssignment};
use myceliumsim::netfile::{load_field, save_network, FormatError};
use myceliumsim::scenario::{load_scenario, ScenarioError};
use myceliumsim::spike::{simulate, CollisionRule, SimError};
use myceliumsim::NodeId;
use serde::Serialize;
use thiserror::Error;

use crate::manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

macro_rules! failed_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Failed(e.to_string())
            }
        }
    )*};
}

failed_from!(CapacityError, EphysError, GrowthError, LogicError, FormatError, ScenarioError, SimError);

#[derive(Debug, Parser)]
#[command(name = "myceliumsim", version, about = "Mycelium growth, spike logic and recording analysis")]
#[command(arg_required_else_help = true, propagate_version = true)]
struct Cli {
    /// Seed for the random parts of grow and synth (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; a `<out>.manifest` is written beside it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress and summary messages.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grow a network from inocula over a substrate field.
    Grow {
        #[arg(long)]
        field: PathBuf,
        /// Growth config (TOML, `myceliumsim/growth/v1`).
        #[arg(long)]
        params: PathBuf,
    },
    /// Run a spike scenario and write the arrival log as CSV.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Enumerate the truth table between fruit-body ports.
    Enumerate(EnumerateArgs),
    /// Detect spikes, statistics, trains and stimulus latencies.
    Analyze {
        /// Recording CSV with header `time_s,<ch1>,<ch2>,...`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Stimulus CSV with header `time_s,kind,duration_s`.
        #[arg(long)]
        stim: Option<PathBuf>,
        /// Detector parameters (TOML); defaults when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Generate a synthetic recording with known spikes.
    Synth {
        /// Synthesis spec (TOML, `myceliumsim/synth/v1`); the V1/V3/V9
        /// reference when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Junction count range from a hyphal tip density.
    Capacity {
        /// Tip count, `MIN:MAX` or a single value.
        #[arg(long)]
        tips: String,
        /// Volume holding that many tips, mm^3, `MIN:MAX` or a single value.
        #[arg(long = "per-mm3")]
        per_mm3: String,
        #[arg(long = "volume-m3")]
        volume_m3: String,
        /// Junctions per tip.
        #[arg(long, default_value = "1")]
        ratio: String,
    },
    /// Check a manifest's digests against the files on disk.
    Verify { manifest: PathBuf },
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Input node ids, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    inputs: Vec<u32>,
    /// Output node id.
    #[arg(long)]
    output: u32,
    /// Readout window `LO:HI` in seconds.
    #[arg(long, value_parser = parse_window)]
    window: (f64, f64),
    /// Collision rule; the scenario's rule when omitted.
    #[arg(long, value_parser = parse_rule)]
    rule: Option<CollisionRule>,
    /// Directory for one arrival-log CSV per input vector.
    #[arg(long)]
    logs: Option<PathBuf>,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad window start {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad window end {hi:?}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err("window needs finite LO <= HI".into());
    }
    Ok((lo, hi))
}

fn parse_rule(s: &str) -> Result<CollisionRule, String> {
    CollisionRule::parse(s).ok_or_else(|| format!("unknown rule {s:?}; use annihilate, priority-pass or fuse"))
}

struct Ctx {
    argv: Vec<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn out(&self, what: &str) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("{what} needs --out")))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn manifest(&self, seeds: Vec<u64>) -> RunManifest {
        RunManifest::new(&self.argv, seeds)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code: 0 on success, 1 on a domain or file error, 2 on a
/// usage error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let ctx = Ctx {
        argv,
        seed: cli.seed,
        out: cli.out,
        quiet: cli.quiet,
    };
    match run(&ctx, cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(ctx: &Ctx, command: Command) -> Result<(), CliError> {
    match command {
        Command::Grow { field, params } => cmd_grow(ctx, &field, &params),
        Command::Simulate { scenario } => cmd_simulate(ctx, &scenario),
        Command::Enumerate(args) => cmd_enumerate(ctx, args),
        Command::Analyze { input, stim, params } => cmd_analyze(ctx, &input, stim.as_deref(), params.as_deref()),
        Command::Synth { spec } => cmd_synth(ctx, spec.as_deref()),
        Command::Capacity { tips, per_mm3, volume_m3, ratio } => {
            cmd_capacity(ctx, &tips, &per_mm3, &volume_m3, &ratio)
        }
        Command::Verify { manifest } => cmd_verify(ctx, &manifest),
    }
}

fn cmd_grow(ctx: &Ctx, field_path: &Path, params_path: &Path) -> Result<(), CliError> {
    let out = ctx.out("grow")?;
    let field = load_field(field_path)?;
    let cfg = GrowthConfig::from_toml(&read(params_path)?)?;
    let start = inoculate(&field, &cfg.growth, &cfg.inocula)?;
    let grown = grow(&start, &field, &cfg.growth, ctx.seed())?;
    save_network(&grown.network, out)?;
    ctx.manifest(vec![ctx.seed()])
        .input(field_path)?
        .input(params_path)?
        .output(out)?
        .write(out)?;
    ctx.note(format!(
        "{} nodes, {} strands, {} branches after {} steps ({})",
        grown.network.nodes().len(),
        grown.network.strands().len(),
        grown.branches,
        grown.steps,
        grown.termination.as_str()
    ));
    Ok(())
}

fn cmd_simulate(ctx: &Ctx, scenario_path: &Path) -> Result<(), CliError> {
    let loaded = load_scenario(scenario_path)?;
    let log = simulate(&loaded.network, &loaded.scenario.injections, loaded.scenario.config)?;
    let csv = log.to_csv();
    match &ctx.out {
        Some(out) => {
            write(out, &csv)?;
            ctx.manifest(Vec::new())
                .input(scenario_path)?
                .input(&loaded.network_path)?
                .output(out)?
                .write(out)?;
            ctx.note(format!("{} arrivals", log.len()));
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_enumerate(ctx: &Ctx, args: EnumerateArgs) -> Result<(), CliError> {
    let loaded = load_scenario(&args.scenario)?;
    let mut config = loaded.scenario.config;
    if let Some(rule) = args.rule {
        config.rule = rule;
    }
    let ports = PortAssignment::new(
        args.inputs.iter().map(|&i| NodeId(i)).collect(),
        NodeId(args.output),
        args.window,
    );
    let r = realize_truth_table(&loaded.network, &ports, &config)?;
    if r.unreachable_output {
        ctx.note("warning: no input reaches the output over conducting strands");
    }
    let line = format!("{} {}", r.table, classify_function(&r.table));
    println!("{line}");

    let mut written = Vec::new();
    if let Some(dir) = &args.logs {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let n = ports.arity();
        for (v, log) in r.logs.iter().enumerate() {
            // input 0 is the leftmost digit
            let bits: String = (0..n).map(|k| if v >> k & 1 == 1 { '1' } else { '0' }).collect();
            let path = dir.join(format!("vector_{bits}.csv"));
            write(&path, &log.to_csv())?;
            written.push(path);
        }
    }
    if let Some(out) = &ctx.out {
        write(out, &format!("{line}\n"))?;
        let mut m = ctx.manifest(Vec::new());
        m.input(&args.scenario)?.input(&loaded.network_path)?.output(out)?;
        for p in &written {
            m.output(p)?;
        }
        m.write(out)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ChannelReport<'a> {
    index: usize,
    label: &'a str,
    /// Spikes at or above the reporting amplitude.
    reportable: usize,
    /// Spikes wider than the long-width flag.
    long_width: usize,
    stats: SpikeStats,
}

#[derive(Serialize)]
struct StatsReport<'a> {
    report_min_amplitude_mv: f64,
    long_width_flag_s: f64,
    warnings: Vec<String>,
    channel: Vec<ChannelReport<'a>>,
}

#[derive(Serialize)]
struct TrainRow<'a> {
    channel: usize,
    label: &'a str,
    class: String,
    spikes: usize,
    first_onset_s: f64,
    last_onset_s: f64,
    mean_period_s: f64,
}

#[derive(Serialize)]
struct TrainReport<'a> {
    train_class_boundary_s: f64,
    train: Vec<TrainRow<'a>>,
}

fn to_toml<T: Serialize>(value: &T) -> Result<String, CliError> {
    toml::to_string(value).map_err(|e| CliError::Failed(e.to_string()))
}

fn cmd_analyze(ctx: &Ctx, input: &Path, stim: Option<&Path>, params_path: Option<&Path>) -> Result<(), CliError> {
    let out = ctx.out("analyze")?;
    let rec = load_recording(input)?;
    let params = match params_path {
        Some(p) => DetectorParams::from_toml(&read(p)?)?,
        None => DetectorParams::default(),
    };
    let detection = detect_spikes(&rec, &params)?;
    for w in &detection.warnings {
        ctx.note(format!("warning: {w}"));
    }
    let spikes = &detection.spikes;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();

    let path = out.join("spikes.csv");
    write(&path, &spikes_to_csv(&rec, spikes))?;
    written.push(path);

    let channels = rec
        .labels
        .iter()
        .enumerate()
        .map(|(index, label)| {
            let own: Vec<_> = spikes.iter().filter(|s| s.channel == index).copied().collect();
            ChannelReport {
                index,
                label,
                reportable: own.iter().filter(|s| s.amplitude_mv >= REPORT_MIN_AMPLITUDE_MV).count(),
                long_width: own.iter().filter(|s| s.width_s > LONG_WIDTH_FLAG_S).count(),
                stats: spike_stats(&own),
            }
        })
        .collect();
    let stats = StatsReport {
        report_min_amplitude_mv: REPORT_MIN_AMPLITUDE_MV,
        long_width_flag_s: LONG_WIDTH_FLAG_S,
        warnings: detection.warnings.clone(),
        channel: channels,
    };
    let path = out.join("stats.toml");
    write(&path, &to_toml(&stats)?)?;
    written.push(path);

    let trains = classify_trains(spikes, &params);
    let report = TrainReport {
        train_class_boundary_s: params.train_class_boundary_s,
        train: trains
            .iter()
            .map(|t| TrainRow {
                channel: t.channel,
                label: &rec.labels[t.channel],
                class: t.class.to_string(),
                spikes: t.spikes.len(),
                first_onset_s: t.spikes[0].onset_s,
                last_onset_s: t.spikes[t.spikes.len() - 1].onset_s,
                mean_period_s: t.mean_period_s,
            })
            .collect(),
    };
    let path = out.join("trains.toml");
    write(&path, &to_toml(&report)?)?;
    written.push(path);

    let mut m = ctx.manifest(Vec::new());
    m.input(input)?;
    if let Some(p) = params_path {
        m.input(p)?;
    }
    if let Some(stim_path) = stim {
        let stimuli = load_stimuli(stim_path)?;
        let mut text = String::from("stimulus,time_s,kind,channel,label,latency_s\n");
        for row in stimulation_latency(&rec, spikes, &stimuli) {
            let latency = row.latency_s.map(|l| format!("{l:?}")).unwrap_or_default();
            text.push_str(&format!(
                "{},{:?},{},{},{},{latency}\n",
                row.stimulus, row.stimulus_time_s, row.kind, row.channel, row.label
            ));
        }
        let path = out.join("latency.csv");
        write(&path, &text)?;
        written.push(path);
        m.input(stim_path)?;
    }
    for p in &written {
        m.output(p)?;
    }
    m.write(out)?;
    ctx.note(format!("{} spikes, {} trains", spikes.len(), trains.len()));
    Ok(())
}

fn cmd_synth(ctx: &Ctx, spec_path: Option<&Path>) -> Result<(), CliError> {
    let out = ctx.out("synth")?;
    let spec = match spec_path {
        Some(p) => SynthSpec::from_toml(&read(p)?)?,
        None => SynthSpec::reference(),
    };
    let synth = generate_synthetic(&spec, ctx.seed())?;
    write(out, &synth.recording.to_csv())?;
    let truth = out.with_extension("truth.csv");
    write(&truth, &spikes_to_csv(&synth.recording, &synth.truth))?;
    let mut m = ctx.manifest(vec![ctx.seed()]);
    if let Some(p) = spec_path {
        m.input(p)?;
    }
    m.output(out)?.output(&truth)?.write(out)?;
    ctx.note(format!(
        "{} channels, {} samples, {} spikes",
        synth.recording.channel_count(),
        synth.recording.len(),
        synth.truth.len()
    ));
    Ok(())
}

#[derive(Serialize)]
struct CapacityReport {
    min: String,
    max: String,
    min_3sig: String,
    max_3sig: String,
    quoted_estimate_per_m3: f64,
}

fn cmd_capacity(ctx: &Ctx, tips: &str, per_mm3: &str, volume: &str, ratio: &str) -> Result<(), CliError> {
    let spec = DensitySpec::parse(tips, per_mm3, volume, ratio)?;
    let count = processor_count(&spec)?;
    println!("{count}");
    ctx.note(format!("junctions {} to {}", count.min, count.max));
    ctx.note(format!("for comparison, the often quoted figure is {QUOTED_ESTIMATE_PER_M3:e} per m^3"));
    if let Some(out) = &ctx.out {
        let report = CapacityReport {
            min: count.min.to_string(),
            max: count.max.to_string(),
            min_3sig: format_sig(&count.min_exact, 3),
            max_3sig: format_sig(&count.max_exact, 3),
            quoted_estimate_per_m3: QUOTED_ESTIMATE_PER_M3,
        };
        write(out, &to_toml(&report)?)?;
        ctx.manifest(Vec::new()).output(out)?.write(out)?;
    }
    Ok(())
}

fn cmd_verify(ctx: &Ctx, path: &Path) -> Result<(), CliError> {
    let m = RunManifest::load(path)?;
    let stale = m.stale();
    if stale.is_empty() {
        ctx.note(format!("{} files verified", m.inputs.len() + m.outputs.len()));
        Ok(())
    } else {
        for p in &stale {
            eprintln!("mismatch: {p}");
        }
        Err(CliError::Failed(format!("{} of the recorded files changed or are missing", stale.len())))
    }
}
