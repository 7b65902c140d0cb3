//! Command-line grammar: one subcommand per workflow, shared flag
//! vocabulary across them (`--lambda`, `--de`, `--sigma2`, `--seed`, …).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use tidemark::{DetectorKind, EmbedderKind};

#[derive(Parser, Debug)]
#[command(
    name = "tidemark",
    version,
    about = "Watermark embedding, detection, and error-exponent toolkit",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample analytic false-negative exponent curves, one file per embedder.
    Exponents(ExponentsArgs),
    /// Estimate error frequencies by seeded Monte Carlo simulation.
    Simulate(SimulateArgs),
    /// Embed a watermark into a covertext read from a file.
    Embed(EmbedArgs),
    /// Run a threshold detector on a received sequence.
    Detect(DetectArgs),
    /// Enumerate the worst-case attack channel and acceptance region at small n.
    AttackDemo(AttackDemoArgs),
    /// Simulate across a list of thresholds and fit an exponent per threshold.
    Sweep(SweepArgs),
}

/// Embedder family selector; mirrors the library's closed-form menu.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbedderArg {
    Optimal,
    Sign,
    ImprovedSign,
    Additive,
}

impl EmbedderArg {
    pub fn kind(self) -> EmbedderKind {
        match self {
            EmbedderArg::Optimal => EmbedderKind::Optimal,
            EmbedderArg::Sign => EmbedderKind::Sign,
            EmbedderArg::ImprovedSign => EmbedderKind::ImprovedSign,
            EmbedderArg::Additive => EmbedderKind::Additive,
        }
    }

    /// Stable name used in file names and config echoes.
    pub fn slug(self) -> &'static str {
        match self {
            EmbedderArg::Optimal => "optimal",
            EmbedderArg::Sign => "sign",
            EmbedderArg::ImprovedSign => "improved-sign",
            EmbedderArg::Additive => "additive",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectorArg {
    /// Empirical mutual information against λ.
    Mi,
    /// Signed empirical correlation against √(1 − e^{−2λ}).
    Corr,
}

impl DetectorArg {
    pub fn kind(self) -> DetectorKind {
        match self {
            DetectorArg::Mi => DetectorKind::Mi,
            DetectorArg::Corr => DetectorKind::Corr,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            DetectorArg::Mi => "mi",
            DetectorArg::Corr => "corr",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatArg {
    Csv,
    Json,
}

impl FormatArg {
    pub fn extension(self) -> &'static str {
        match self {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistortionArg {
    /// 0/1 disagreement distortion.
    Hamming,
    /// Squared difference of symbol indices.
    Squared,
}

#[derive(clap::Args, Debug)]
pub struct ExponentsArgs {
    /// Embedding distortion budget De.
    #[arg(long)]
    pub de: f64,
    /// Covertext variance σ².
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Embedder to plot; repeat the flag for several curves.
    #[arg(long = "embedder", required = true)]
    pub embedders: Vec<EmbedderArg>,
    /// Largest λ sampled; defaults to 1.2 × the zero-exponent threshold.
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Number of uniformly spaced λ samples.
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
    /// Output prefix; files are written to `<out>-<embedder>.<format>`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(clap::Args, Debug)]
pub struct SimulateArgs {
    /// Single block length; alternative to --n-list.
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<usize>,
    /// Comma-separated block lengths, strictly increasing.
    #[arg(long, value_delimiter = ',', required_unless_present = "n")]
    pub n_list: Vec<usize>,
    /// Trials per (block length, hypothesis) cell; at least 100.
    #[arg(long)]
    pub trials: u64,
    /// Covertext variance σ².
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Detection threshold λ (guaranteed false-positive exponent).
    #[arg(long)]
    pub lambda: f64,
    /// Embedding distortion budget De.
    #[arg(long)]
    pub de: f64,
    #[arg(long, value_enum)]
    pub embedder: EmbedderArg,
    #[arg(long, value_enum, default_value_t = DetectorArg::Mi)]
    pub detector: DetectorArg,
    /// Root seed. Mandatory: there is no wall-clock default, so every run
    /// is reproducible by construction.
    #[arg(long)]
    pub seed: u64,
    /// Optional sign-flip attack: each embedded sample's sign is flipped
    /// independently with this probability before detection.
    #[arg(long)]
    pub flip: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(clap::Args, Debug)]
pub struct EmbedArgs {
    /// Covertext file, one float per line.
    #[arg(long)]
    pub covertext: PathBuf,
    /// Watermark file, one ±1 per line, same length as the covertext.
    #[arg(long)]
    pub watermark: PathBuf,
    /// Embedding distortion budget De.
    #[arg(long)]
    pub de: f64,
    #[arg(long, value_enum, default_value_t = EmbedderArg::Optimal)]
    pub embedder: EmbedderArg,
    /// Output file for the embedded sequence; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct DetectArgs {
    /// Watermark file, one ±1 per line.
    #[arg(long)]
    pub watermark: PathBuf,
    /// Received sequence file, one float per line.
    #[arg(long)]
    pub received: PathBuf,
    /// Detection threshold λ.
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = DetectorArg::Mi)]
    pub detector: DetectorArg,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(clap::Args, Debug)]
pub struct AttackDemoArgs {
    /// Block length; the demo enumerates every sequence, so keep it small.
    #[arg(long)]
    pub n: usize,
    /// Alphabet size.
    #[arg(long, default_value_t = 2)]
    pub alphabet_size: usize,
    /// Detection threshold λ (must be > 0).
    #[arg(long)]
    pub lambda: f64,
    /// Attacker's per-symbol distortion budget Da.
    #[arg(long, default_value_t = 0.0)]
    pub da: f64,
    #[arg(long, value_enum, default_value_t = DistortionArg::Hamming)]
    pub distortion: DistortionArg,
    /// Covertext pmf, comma separated; uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    pub px: Option<Vec<f64>>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct SweepArgs {
    /// Comma-separated detection thresholds to sweep.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambda_list: Vec<f64>,
    /// Single block length; alternative to --n-list.
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<usize>,
    /// Comma-separated block lengths, strictly increasing.
    #[arg(long, value_delimiter = ',', required_unless_present = "n")]
    pub n_list: Vec<usize>,
    /// Trials per (block length, hypothesis) cell; at least 100.
    #[arg(long)]
    pub trials: u64,
    /// Covertext variance σ².
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Embedding distortion budget De.
    #[arg(long)]
    pub de: f64,
    #[arg(long, value_enum)]
    pub embedder: EmbedderArg,
    #[arg(long, value_enum, default_value_t = DetectorArg::Mi)]
    pub detector: DetectorArg,
    /// Root seed shared by every threshold's run.
    #[arg(long)]
    pub seed: u64,
    /// Optional sign-flip attack probability.
    #[arg(long)]
    pub flip: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}
