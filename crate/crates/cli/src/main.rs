//! `dikt` — difficulty-aware knowledge tracing for tutoring dialogues.
//!
//! Subcommands cover the full pipeline: ingest transcripts, simulate
//! synthetic corpora with known ground truth, train, evaluate, run the
//! interpretability analyses, recover parameters against simulation truth,
//! and plot. Every run writes a manifest next to its outputs; exit code 0 is
//! success, 1 a domain error (the error name goes to stderr), 2 a usage
//! error.

mod commands;
mod config;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use config::{FileConfig, Resolved};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderArg {
    Direct,
    Lm,
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum MasteryArg {
    SigmoidTheta,
    RHat,
}

impl From<MasteryArg> for dikt_core::eval::MasterySource {
    fn from(value: MasteryArg) -> Self {
        match value {
            MasteryArg::SigmoidTheta => dikt_core::eval::MasterySource::SigmoidTheta,
            MasteryArg::RHat => dikt_core::eval::MasterySource::RHat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DisplayArg {
    Sigmoid,
    CorpusMinmax,
}

impl From<DisplayArg> for dikt_core::eval::DisplayRule {
    fn from(value: DisplayArg) -> Self {
        match value {
            DisplayArg::Sigmoid => dikt_core::eval::DisplayRule::Sigmoid,
            DisplayArg::CorpusMinmax => dikt_core::eval::DisplayRule::CorpusMinmax,
        }
    }
}

/// Flags shared across subcommands; `DIKT_*` environment variables mirror
/// them, and a `--config` TOML file sits below both.
#[derive(Debug, Args)]
pub struct CommonOpts {
    #[arg(long, global = true, env = "DIKT_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "DIKT_SEED")]
    pub seed: Option<u64>,
    /// Output directory; every run writes its artifacts and manifest here.
    #[arg(long, global = true, env = "DIKT_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "DIKT_PROVIDER", value_enum)]
    pub provider: Option<ProviderArg>,
    /// Weights file for the lm provider, or fixture table for mock.
    #[arg(long, global = true, env = "DIKT_MODEL_ID")]
    pub model_id: Option<String>,
    #[arg(long, global = true, env = "DIKT_LR")]
    pub lr: Option<f64>,
    #[arg(long, global = true, env = "DIKT_RANK")]
    pub rank: Option<usize>,
    #[arg(long, global = true, env = "DIKT_EPOCHS")]
    pub epochs: Option<usize>,
    /// Decision threshold for accuracy.
    #[arg(long, global = true, env = "DIKT_THRESHOLD")]
    pub threshold: Option<f64>,
    /// Minimum records per KC to enter the difficulty analysis.
    #[arg(long, global = true, env = "DIKT_MIN_KC_COUNT")]
    pub min_kc_count: Option<usize>,
    #[arg(long, global = true, env = "DIKT_MASTERY_SOURCE", value_enum)]
    pub mastery_source: Option<MasteryArg>,
    #[arg(long, global = true, env = "DIKT_DISPLAY", value_enum)]
    pub display: Option<DisplayArg>,
    /// Fraction of training dialogues held out for validation.
    #[arg(long, global = true, env = "DIKT_VAL_FRACTION")]
    pub val_fraction: Option<f64>,
}

#[derive(Debug, Parser)]
#[command(
    name = "dikt",
    version,
    about = "Difficulty-aware knowledge tracing for tutoring dialogues"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalize raw transcripts into a validated corpus.
    Ingest(commands::ingest::IngestArgs),
    /// Generate a synthetic corpus with known generating parameters.
    Simulate(commands::simulate::SimulateArgs),
    /// Fine-tune a provider and the IRT scalar on correctness labels.
    Train(commands::train::TrainArgs),
    /// Score a corpus with a checkpoint and report masked AUC/accuracy.
    Eval(commands::eval::EvalArgs),
    /// Compare predicted KC difficulty against empirical difficulty.
    AnalyzeDifficulty(commands::analyze::AnalyzeDifficultyArgs),
    /// Mean mastery against practice opportunities per KC.
    LearningCurve(commands::analyze::LearningCurveArgs),
    /// Per-turn ability/difficulty table for one dialogue.
    CaseStudy(commands::analyze::CaseStudyArgs),
    /// Fit per-pair parameters on a simulated corpus and score recovery.
    Recover(commands::recover::RecoverArgs),
    /// Render report sections as SVG images.
    Plot(commands::plot::PlotArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 0 for --help/--version, 2 for usage errors
            let code = if e.use_stderr() { 2u8 } else { 0u8 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let file_config = match &cli.common.config {
        Some(path) => match FileConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: ConfigError: {e:#}");
                return ExitCode::from(1);
            }
        },
        None => FileConfig::default(),
    };
    let resolved = Resolved::merge(&cli.common, &file_config);
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest::run(&args, &resolved),
        Command::Simulate(args) => commands::simulate::run(&args, &resolved),
        Command::Train(args) => commands::train::run(&args, &resolved),
        Command::Eval(args) => commands::eval::run(&args, &resolved),
        Command::AnalyzeDifficulty(args) => commands::analyze::run_difficulty(&args, &resolved),
        Command::LearningCurve(args) => commands::analyze::run_curves(&args, &resolved),
        Command::CaseStudy(args) => commands::analyze::run_case_study(&args, &resolved),
        Command::Recover(args) => commands::recover::run(&args, &resolved),
        Command::Plot(args) => commands::plot::run(&args, &resolved),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<dikt_core::Error>() {
                Some(domain) => eprintln!("error: {}: {domain}", domain.name()),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::from(1)
        }
    }
}
