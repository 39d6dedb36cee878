use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use svq::config::{ExperimentConfig, OUT_DIR_ENV};
use svq::experiment;
use svq::SvqError;

/// Chains of stochastic vector quantisers: generate data, train, analyse
/// and plot reproducible experiments.
#[derive(Parser, Debug)]
#[command(name = "svq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the configured dataset into <out>/dataset.svq.
    GenData(RunArgs),
    /// Train with the multi-seed protocol; writes model.svq and trace.svq.
    Train(RunArgs),
    /// Analyse <out>/model.svq against <out>/dataset.svq.
    Analyze(RunArgs),
    /// Render SVG plots from the analysis outputs into <out>/plots.
    Plot(RunArgs),
    /// gen-data, train, analyze and plot in one go.
    Run(RunArgs),
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Experiment config file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled config: `circle` or `hier` (alias `hier-phases`).
    #[arg(long)]
    preset: Option<String>,
    /// gen-data: dataset seed. train/run: single training seed.
    /// analyze/plot: seed for sensitivity base points.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for this run (default: <root>/<config out_dir>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root for relative output directories.
    #[arg(long, env = OUT_DIR_ENV, default_value = "runs")]
    out_root: PathBuf,
    /// Training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Connectivity threshold as a fraction of each stage's largest component.
    #[arg(long)]
    threshold: Option<f64>,
    /// Activity-map and histogram resolution.
    #[arg(long)]
    grid: Option<usize>,
    /// Number of samples to generate.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    GenData,
    Train,
    Analyze,
    Plot,
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 3;
const EXIT_DATA: u8 = 4;
const EXIT_DIVERGENCE: u8 = 5;
const EXIT_STRUCTURE: u8 = 6;

fn exit_code(e: &SvqError) -> u8 {
    match e {
        SvqError::Config(_) | SvqError::InvalidParameter { .. } => EXIT_CONFIG,
        SvqError::Divergence { .. } | SvqError::NonFinite(_) => EXIT_DIVERGENCE,
        SvqError::StructureCheck(_) => EXIT_STRUCTURE,
        SvqError::Io { .. } => EXIT_IO,
        _ => EXIT_DATA,
    }
}

fn resolve(args: &RunArgs, stage: Stage) -> Result<ExperimentConfig, SvqError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)
            .map_err(|e| SvqError::Config(e.to_string()))?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => return Err(SvqError::Config("pass --config PATH or --preset NAME".into())),
    };
    if let Some(seed) = args.seed {
        match stage {
            Stage::GenData => cfg.dataset.seed = seed,
            Stage::Train => {
                cfg.schedule.seed = seed;
                cfg.train.seeds = vec![seed];
            }
            Stage::Analyze | Stage::Plot => cfg.analysis.seed = seed,
        }
    }
    if let Some(e) = args.epochs {
        cfg.schedule.epochs = e;
    }
    if let Some(t) = args.threshold {
        cfg.analysis.threshold = t;
    }
    if let Some(g) = args.grid {
        cfg.analysis.grid = g;
    }
    if let Some(c) = args.count {
        cfg.dataset.count = c;
    }
    let out = match &args.out {
        Some(o) => o.clone(),
        None if cfg.out_dir.is_absolute() => cfg.out_dir.clone(),
        None => args.out_root.join(&cfg.out_dir),
    };
    cfg.out_dir = std::path::absolute(&out).map_err(|e| SvqError::Io {
        path: out.display().to_string(),
        source: e,
    })?;
    cfg.validate().map_err(|e| SvqError::Config(e.to_string()))?;
    Ok(cfg)
}

fn gen_data(cfg: &ExperimentConfig) -> Result<(), SvqError> {
    let path = experiment::cmd_gen_data(cfg)?;
    println!("dataset: {} ({} samples)", path.display(), cfg.dataset.count);
    Ok(())
}

fn train(cfg: &ExperimentConfig) -> Result<(), SvqError> {
    let outcome = experiment::cmd_train(cfg)?;
    print!("{}", outcome.report);
    if let Some(t) = &outcome.trace {
        if let (Some(a), Some(b)) = (t.initial_total(), t.final_total()) {
            println!("objective: {a:.6} -> {b:.6}");
        }
    }
    println!("model: {}", cfg.out_dir.join(experiment::MODEL_FILE).display());
    Ok(())
}

fn analyze(cfg: &ExperimentConfig) -> Result<(), SvqError> {
    experiment::cmd_analyze(cfg)?;
    let report = cfg.out_dir.join(experiment::ANALYSIS_REPORT_FILE);
    print!("{}", std::fs::read_to_string(&report).map_err(|e| SvqError::Io {
        path: report.display().to_string(),
        source: e,
    })?);
    Ok(())
}

fn plot(cfg: &ExperimentConfig) -> Result<(), SvqError> {
    for p in experiment::cmd_plot(cfg)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), SvqError> {
    match cli.command {
        Command::GenData(a) => gen_data(&resolve(&a, Stage::GenData)?),
        Command::Train(a) => train(&resolve(&a, Stage::Train)?),
        Command::Analyze(a) => analyze(&resolve(&a, Stage::Analyze)?),
        Command::Plot(a) => plot(&resolve(&a, Stage::Plot)?),
        Command::Run(a) => {
            let cfg = resolve(&a, Stage::Train)?;
            gen_data(&cfg)?;
            train(&cfg)?;
            analyze(&cfg)?;
            plot(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
