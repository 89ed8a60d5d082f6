//! `labelnoise`: rasterize annotations, evaluate label matrices, measure
//! labeling-function disagreement, generate synthetic corpora and run the
//! sensitivity experiment.
//!
//! Exit codes: 0 success, 2 usage, 3 runtime or divergence, 4 input/output or format.

mod commands;
mod manifest;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use labelnoise::LabelingFunction;

#[derive(Debug, Parser)]
#[command(
    name = "labelnoise",
    version,
    about = "Framewise label quantization and label-noise experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn parse_fn(s: &str) -> Result<LabelingFunction, String> {
    s.parse().map_err(|e: labelnoise::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct PitchArgs {
    /// MIDI pitch mapped to label 0.
    #[arg(long, default_value_t = 21)]
    pub lowest_pitch: u8,
    /// Number of labels K.
    #[arg(long, default_value_t = 88)]
    pub num_labels: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a .tsv or .mid annotation into a framewise label matrix.
    Rasterize {
        input: PathBuf,
        #[arg(long)]
        fps: f64,
        #[arg(long = "fn", value_parser = parse_fn)]
        function: LabelingFunction,
        /// Required for the random functions e and f.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV; defaults to `<input>.<fn>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-event frame intervals to `<out>.intervals.json`.
        #[arg(long)]
        intervals: bool,
        #[command(flatten)]
        pitches: PitchArgs,
    },
    /// Score a predicted label matrix against a reference.
    Eval {
        /// Predicted matrix CSV (with its JSON sidecar).
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Reference matrix CSV (with its JSON sidecar).
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        /// Annotation used for the reference (kind a) and, with --fn, for the prediction.
        #[arg(long)]
        annotation: Option<PathBuf>,
        /// Labeling function for a prediction rasterized from --annotation.
        #[arg(long = "fn", value_parser = parse_fn)]
        function: Option<LabelingFunction>,
        /// Frame rate for a prediction rasterized from --annotation.
        #[arg(long)]
        fps: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100.0)]
        ref_fps: f64,
        #[arg(long, default_value_t = 30.0)]
        window_sec: f64,
        /// Metrics CSV; also writes `<out>.summary.json` and a manifest.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pitches: PitchArgs,
    },
    /// Compare two labeling functions on one annotation, or two matrices cell by cell.
    Disagree {
        annotation: Option<PathBuf>,
        #[arg(long)]
        fps: Option<f64>,
        #[arg(long = "fn-a", value_parser = parse_fn, default_value = "a")]
        fn_a: LabelingFunction,
        #[arg(long = "fn-b", value_parser = parse_fn)]
        fn_b: Option<LabelingFunction>,
        #[arg(long)]
        seed_a: Option<u64>,
        #[arg(long)]
        seed_b: Option<u64>,
        /// First matrix CSV (matrix mode).
        #[arg(long)]
        a: Option<PathBuf>,
        /// Second matrix CSV (matrix mode).
        #[arg(long)]
        b: Option<PathBuf>,
        /// JSON output; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pitches: PitchArgs,
    },
    /// Generate a synthetic corpus: annotations, features and a corpus manifest.
    Synth {
        /// JSON synth configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        num_pieces: Option<usize>,
        /// Frame rate of the rendered features.
        #[arg(long, default_value_t = 31.25)]
        fps: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model per (labeling function, seed) and score it against the reference.
    Experiment {
        #[arg(long, value_delimiter = ',', value_parser = parse_fn, required = true)]
        fns: Vec<LabelingFunction>,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        /// JSON experiment configuration ({"synth": ..., "train": ..., ...}).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        train_fps: Option<f64>,
        #[arg(long)]
        ref_fps: Option<f64>,
        #[arg(long)]
        window_sec: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Use single precision for features and model.
        #[arg(long)]
        f32: bool,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print statistics of an annotation (.tsv/.mid) or a label matrix (.csv).
    Inspect {
        input: PathBuf,
        #[command(flatten)]
        pitches: PitchArgs,
    },
    /// Re-run a command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Replace the recorded --out.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(labelnoise::Error),
    /// Bad or unreadable input file.
    Input(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    pub fn in_file(path: &Path, e: labelnoise::Error) -> Self {
        match e {
            labelnoise::Error::Contract(_) | labelnoise::Error::Divergence { .. } => {
                CliError::Lib(e)
            }
            other => CliError::Input(format!("{}: {other}", path.display())),
        }
    }

    pub fn exit_code(&self) -> u8 {
        use labelnoise::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(E::Contract(_) | E::Divergence { .. }) => 3,
            CliError::Lib(_) | CliError::Input(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Input(m) => write!(f, "{m}"),
        }
    }
}

impl From<labelnoise::Error> for CliError {
    fn from(e: labelnoise::Error) -> Self {
        CliError::Lib(e)
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(args: &[String]) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(
        std::iter::once("labelnoise".to_string()).chain(args.iter().cloned()),
    ) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    commands::dispatch(cli.command, args)
}
