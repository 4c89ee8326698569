//! The `lsdp` command line: segmentation, training, ranking, evaluation and
//! synthetic fixtures.
//!
//! Exit status is 0 on success, 1 when a command fails at run time and 2 on
//! a usage error.

pub mod commands;
pub mod policy;
pub mod report;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use policy::{Method, Model, PolicyFile};

#[derive(Debug, Parser)]
#[command(name = "lsdp", version, about = "Sparse radial-basis movement primitives")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cut a recorded stream into demonstrations around its fastest movements.
    Segment(SegmentArgs),
    /// Learn a policy from demonstrations.
    Train(TrainArgs),
    /// Rank the features of a trained policy along its regularization path.
    Rank(RankArgs),
    /// Score policies on demonstrations.
    Eval(EvalArgs),
    /// Write a synthetic fixture with a planted sparse model.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Recorded stream, `time,q1..qn`.
    pub input: PathBuf,
    /// Output directory for `demo_<k>.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of demonstrations to extract.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    /// Window length in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub window: f64,
    /// Expected sampling rate in Hz; the stream must match it.
    #[arg(long, default_value_t = 500.0)]
    pub rate: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub method: Method,
    /// Demonstration files. `clsdp` takes all of them, the others exactly one.
    #[arg(required = true)]
    pub demos: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Acceleration penalty; also the ridge penalty for `ridge`.
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub cv_folds: Option<usize>,
    /// Basis size for `dmp` and `ridge`.
    #[arg(long, default_value_t = 10)]
    pub n_basis: usize,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    pub policy: PathBuf,
    /// The demonstrations the policy was trained on.
    #[arg(required = true)]
    pub demos: Vec<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub ratio: f64,
    /// Path export, `lambda,feature_index,row_norm`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Policies (`.json`) and demonstrations (anything else), in any order.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Also write the table here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Standard deviation of the added noise, rad.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub dofs: usize,
    #[arg(long, default_value_t = 5)]
    pub demos: usize,
    #[arg(long, default_value_t = 12)]
    pub features: usize,
    #[arg(long, default_value_t = 500.0)]
    pub rate: f64,
    /// Seconds of blend between demonstrations in `stream.csv`.
    #[arg(long, default_value_t = 1.0)]
    pub gap: f64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<lsdp_core::Error> for CliError {
    fn from(e: lsdp_core::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    match cli.command {
        Command::Segment(a) => commands::segment(&a, out),
        Command::Train(a) => commands::train(&a, out),
        Command::Rank(a) => commands::rank(&a, out),
        Command::Eval(a) => commands::eval(&a, out),
        Command::Synth(a) => commands::synth(&a, out),
    }
}
