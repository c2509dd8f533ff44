//! Batch pipeline driver for the sleep-arousal toolkit.
//!
//! Exit codes: 0 success; 1 usage or configuration problems; 2 container
//! I/O problems; 3 undefined metrics or degenerate data; 4 numerical
//! divergence during training.

mod commands;
mod config;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polyscat::Error;

use crate::config::PipelineConfig;

#[derive(Parser)]
#[command(
    name = "polyscat",
    version,
    about = "Sleep-arousal detection pipeline: scattering features, stacked-LSTM classifiers, \
             committee fusion, gross AUROC/AUPRC",
    propagate_version = true
)]
struct Cli {
    /// Pipeline configuration file (JSON, single document).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed overriding the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for per-record/per-channel parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset plus its partition index.
    Synth {
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the configured record count.
        #[arg(long)]
        records: Option<usize>,
        /// Override the configured record duration in seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Compute scattering features, optionally normalizing them.
    Scatter {
        /// Dataset directory of record containers.
        #[arg(long)]
        records: PathBuf,
        /// Output directory of feature containers.
        #[arg(long)]
        out: PathBuf,
        /// Restrict to a named channel group (or single channel).
        #[arg(long)]
        channels: Option<String>,
        /// Fit a log-median normalizer and rewrite the features normalized.
        #[arg(long)]
        normalize: bool,
        /// Partition index constraining the normalizer fit.
        #[arg(long)]
        index: Option<PathBuf>,
        /// Fold whose train split provides the normalizer statistics.
        #[arg(long)]
        fold: Option<usize>,
        /// Apply an existing normalizer file instead of fitting one.
        #[arg(long)]
        normalizer: Option<PathBuf>,
    },
    /// Train one base classifier on a cross-validation fold.
    Train {
        /// Directory of normalized feature containers.
        #[arg(long)]
        features: PathBuf,
        /// Partition index file.
        #[arg(long)]
        index: PathBuf,
        /// Cross-validation fold (0-9).
        #[arg(long)]
        fold: usize,
        /// Output model directory.
        #[arg(long)]
        out: PathBuf,
        /// Frames to pad every sequence to; "auto" uses the longest sequence.
        #[arg(long)]
        max_length: Option<String>,
    },
    /// Emit per-frame posteriors; several --model flags average a committee.
    Predict {
        /// Directory of normalized feature containers.
        #[arg(long)]
        features: PathBuf,
        /// Model directory (repeatable).
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        /// Output directory of prediction containers.
        #[arg(long)]
        out: PathBuf,
    },
    /// Gross AUROC/AUPRC of stored predictions against frame targets.
    Evaluate {
        /// Directory of prediction containers.
        #[arg(long)]
        predictions: PathBuf,
        /// Directory of feature containers carrying the frame targets.
        #[arg(long)]
        features: PathBuf,
        /// Optional JSON report file (the report always prints on stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional directory for ROC/PR curve CSVs.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Per-channel-group experiment on one fold; emits group,auroc,auprc.
    Ablate {
        /// Dataset directory of record containers.
        #[arg(long)]
        records: PathBuf,
        /// Partition index file.
        #[arg(long)]
        index: PathBuf,
        /// Cross-validation fold (0-9).
        #[arg(long, default_value_t = 0)]
        fold: usize,
        /// Working/output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Gross metrics as the committee grows one member at a time.
    EnsembleCurve {
        /// Directory of normalized test feature containers.
        #[arg(long)]
        features: PathBuf,
        /// Model directory (repeatable; members sorted by path).
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        /// Optional CSV output file (the curve always prints on stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter-bank inspection tools.
    Filterbank {
        #[command(subcommand)]
        command: FilterbankCommand,
    },
}

#[derive(Subcommand)]
enum FilterbankCommand {
    /// Write every spectrum as little-endian f64 plus a JSON manifest.
    Dump {
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::Input(_)
        | Error::Shape(_)
        | Error::State(_)
        | Error::Length(_)
        | Error::Lookup(_) => 1,
        Error::Io { .. }
        | Error::Json { .. }
        | Error::Format { .. }
        | Error::Truncated { .. }
        | Error::Dimension { .. } => 2,
        Error::UndefinedMetric(_)
        | Error::DegenerateBatch(_)
        | Error::Training(_)
        | Error::Fit(_)
        | Error::Partition(_)
        | Error::Generation(_) => 3,
        Error::Divergence { .. } => 4,
    }
}

fn parse_max_length(raw: &Option<String>) -> Result<Option<usize>, Error> {
    match raw.as_deref() {
        None => Ok(None),
        Some("auto") => Ok(Some(0)),
        Some(text) => text
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Config(format!("--max-length expects a number or \"auto\", got {text}"))),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("could not size the worker pool: {e}")))?;
    }
    let mut config = PipelineConfig::load(cli.config.as_deref(), cli.seed)?;

    match cli.command {
        Command::Synth {
            out,
            records,
            duration,
        } => {
            if let Some(n) = records {
                config.synth.n_records = n;
            }
            if let Some(d) = duration {
                config.synth.duration_s = d;
            }
            config.synth.validate()?;
            commands::synth::run(&config, &out)
        }
        Command::Scatter {
            records,
            out,
            channels,
            normalize,
            index,
            fold,
            normalizer,
        } => commands::scatter::run(
            &config,
            &commands::scatter::ScatterArgs {
                records,
                out,
                channels,
                normalize,
                index,
                fold,
                normalizer,
            },
        ),
        Command::Train {
            features,
            index,
            fold,
            out,
            max_length,
        } => commands::train::run(
            &config,
            &commands::train::TrainArgs {
                features,
                index,
                fold,
                out,
                max_length: parse_max_length(&max_length)?,
            },
        ),
        Command::Predict {
            features,
            models,
            out,
        } => commands::predict::run(
            &config,
            &commands::predict::PredictArgs {
                features,
                models,
                out,
            },
        ),
        Command::Evaluate {
            predictions,
            features,
            out,
            curves,
        } => commands::evaluate::run(
            &config,
            &commands::evaluate::EvaluateArgs {
                predictions,
                features,
                out,
                curves,
            },
        ),
        Command::Ablate {
            records,
            index,
            fold,
            out,
        } => commands::ablate::run(
            &config,
            &commands::ablate::AblateArgs {
                records,
                index,
                fold,
                out,
            },
        ),
        Command::EnsembleCurve {
            features,
            models,
            out,
        } => commands::ensemble_curve::run(
            &config,
            &commands::ensemble_curve::EnsembleCurveArgs {
                features,
                models,
                out,
            },
        ),
        Command::Filterbank { command } => match command {
            FilterbankCommand::Dump { out } => {
                commands::filterbank::run(&config, &commands::filterbank::DumpArgs { out })
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version are successful outcomes; anything else is
            // a usage error (exit 1).
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
