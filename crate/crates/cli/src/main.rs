use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use fluorosim_core::dataset::io::CONFIG_FILE;
use fluorosim_core::dataset::{corpus_stats, read_corpus, simulate_corpus, validate_sequence, Corpus, Limits, ValidationReport};
use fluorosim_core::recognize::{corpus_features, evaluate, fit, DecodeMode, FeatureSpace, PhaseDecoder};
use fluorosim_core::simulation::SimConfig;
use fluorosim_core::{ConfigError, CorpusError, PhaseLabels, SimError};

const EXIT_FINDINGS: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "fluorosim", version, about = "Simulate and analyse X-ray guided pelvic fixation workflows")]
struct Cli {
    /// Print machine-readable JSON instead of text reports.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a corpus of annotated sequences.
    Simulate(SimulateArgs),
    /// Check every sequence of a corpus against the workflow grammar.
    Validate(CorpusArgs),
    /// Label frequencies and sequence lengths of a corpus.
    Stats(CorpusArgs),
    /// Fit a phase decoder on a labelled corpus.
    Fit(FitArgs),
    /// Decode a corpus and score the predictions.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed. Drawn from system entropy and printed when absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    sequences: u64,
    /// Defaults to the number of available cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Where to write the decoder JSON.
    #[arg(long)]
    out: PathBuf,
    /// Feature noise in degrees.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Seed for feature noise. Drawn from system entropy and printed when absent.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    decoder: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Feature noise in degrees.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Seed for feature noise. Drawn from system entropy and printed when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the mode stored in the decoder.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Filter,
    MaxProduct,
}

impl From<Mode> for DecodeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Filter => DecodeMode::Filter,
            Mode::MaxProduct => DecodeMode::MaxProduct,
        }
    }
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn load_config(path: Option<&Path>) -> Result<SimConfig> {
    let Some(path) = path else {
        return Ok(SimConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    SimConfig::from_toml_str(&text).map_err(|e| {
        let place = match &e {
            ConfigError::Parse { line: Some(line), .. } => format!("{}:{line}", path.display()),
            _ => path.display().to_string(),
        };
        anyhow::Error::new(e).context(place)
    })
}

/// The config a corpus was simulated with, or the defaults if it has none.
fn corpus_config(root: &Path) -> Result<SimConfig> {
    let path = root.join(CONFIG_FILE);
    load_config(path.exists().then_some(path.as_path()))
}

fn load_corpus(root: &Path) -> Result<Corpus> {
    read_corpus(root).with_context(|| format!("cannot read corpus {}", root.display()))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn simulate(args: &SimulateArgs, json: bool) -> Result<u8> {
    let config = load_config(args.config.as_deref())?;
    let seed = seed_or_entropy(args.seed);
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let manifest = simulate_corpus(&args.out, &config, seed, args.sequences, workers)?;
    if json {
        print_json(&serde_json::json!({
            "out": args.out,
            "master_seed": seed,
            "sequences": manifest.sequences.len(),
            "frames": manifest.total_frames(),
            "config_hash": manifest.config_hash,
        }))?;
    } else {
        println!(
            "wrote {} sequences ({} frames) to {} with seed {seed}",
            manifest.sequences.len(),
            manifest.total_frames(),
            args.out.display()
        );
    }
    Ok(0)
}

fn validate(args: &CorpusArgs, json: bool) -> Result<u8> {
    let config = corpus_config(&args.corpus)?;
    let corpus = load_corpus(&args.corpus)?;
    let limits = Limits {
        max_frames: config.max_frames,
        max_instances: config.max_instances,
    };
    let mut report = ValidationReport::default();
    for records in &corpus.sequences {
        report.merge(validate_sequence(records, &limits));
    }
    if json {
        print_json(&report)?;
    } else {
        for v in &report.violations {
            println!("{v}");
        }
        println!(
            "{} sequences, {} frames, {} violations",
            report.sequences,
            report.frames,
            report.violations.len()
        );
    }
    Ok(if report.is_valid() { 0 } else { EXIT_FINDINGS })
}

fn stats(args: &CorpusArgs, json: bool) -> Result<u8> {
    let corpus = load_corpus(&args.corpus)?;
    let stats = corpus_stats(&corpus.sequences);
    if json {
        print_json(&stats)?;
    } else {
        print!("{}", stats.to_text());
    }
    Ok(0)
}

fn fit_cmd(args: &FitArgs, json: bool) -> Result<u8> {
    let space = FeatureSpace::from_config(&corpus_config(&args.corpus)?)?;
    let corpus = load_corpus(&args.corpus)?;
    let seed = seed_or_entropy(args.seed);
    let decoder = fit(&corpus.sequences, space, args.noise.to_radians(), seed)?;
    fs::write(&args.out, decoder.to_json() + "\n").with_context(|| format!("cannot write {}", args.out.display()))?;
    if json {
        print_json(&serde_json::json!({
            "out": args.out,
            "sequences": corpus.sequences.len(),
            "frames": corpus.manifest.total_frames(),
            "noise_deg": args.noise,
            "seed": seed,
        }))?;
    } else {
        println!(
            "fitted on {} sequences ({} frames), wrote {}",
            corpus.sequences.len(),
            corpus.manifest.total_frames(),
            args.out.display()
        );
    }
    Ok(0)
}

fn eval(args: &EvalArgs, json: bool) -> Result<u8> {
    let text = fs::read_to_string(&args.decoder).with_context(|| format!("cannot read {}", args.decoder.display()))?;
    let mut decoder = PhaseDecoder::from_json(&text).with_context(|| format!("malformed decoder {}", args.decoder.display()))?;
    if let Some(mode) = args.mode {
        decoder.mode = mode.into();
    }
    let corpus = load_corpus(&args.corpus)?;
    if corpus.sequences.iter().all(|s| s.is_empty()) {
        bail!("corpus {} has no frames", args.corpus.display());
    }
    let seed = seed_or_entropy(args.seed);
    let noise = args.noise.to_radians();
    let predictions: Vec<Vec<PhaseLabels>> = corpus
        .sequences
        .par_iter()
        .enumerate()
        .map(|(i, s)| decoder.decode(&corpus_features(s, i, &decoder.feature_space, noise, seed)))
        .collect();
    let predicted: Vec<PhaseLabels> = predictions.into_iter().flatten().collect();
    let truth: Vec<PhaseLabels> = corpus.frames().map(|r| r.labels).collect();
    let metrics = evaluate(&predicted, &truth)?;
    if json {
        print_json(&metrics)?;
    } else {
        print!("{}", metrics.to_text());
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Simulate(a) => simulate(a, cli.json),
        Command::Validate(a) => validate(a, cli.json),
        Command::Stats(a) => stats(a, cli.json),
        Command::Fit(a) => fit_cmd(a, cli.json),
        Command::Eval(a) => eval(a, cli.json),
    }
}

/// Config problems exit 2; everything else that stops a run is treated as
/// an I/O failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if let Some(CorpusError::Config(_) | CorpusError::Sim(SimError::Config(_))) = cause.downcast_ref() {
            return EXIT_CONFIG;
        }
        if let Some(SimError::Config(_)) = cause.downcast_ref() {
            return EXIT_CONFIG;
        }
    }
    EXIT_IO
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
