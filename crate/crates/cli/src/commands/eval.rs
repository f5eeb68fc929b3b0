//! `dikt eval`: score a corpus split with a trained checkpoint and report
//! masked AUC/accuracy plus the per-record prediction export.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};

use dikt_core::eval::{build_prediction_records, evaluate_records, export_predictions_csv};
use dikt_core::{Corpus, IRTParams, SplitTag};

use crate::config::Resolved;
use crate::manifest::ManifestBuilder;

use super::{ensure_out_dir, trainable_provider, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    All,
    Train,
    Validation,
    Test,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Directory holding checkpoint.json and adapters.json from `train`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub split: SplitArg,
}

pub fn run(args: &EvalArgs, resolved: &Resolved) -> Result<()> {
    let out = ensure_out_dir(resolved)?;
    let corpus = Corpus::load(&args.corpus, args.catalog.as_deref())?;

    let checkpoint_path = args.checkpoint.join("checkpoint.json");
    let checkpoint: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(&checkpoint_path)
            .with_context(|| format!("read {}", checkpoint_path.display()))?,
    )?;
    let alpha = checkpoint["alpha"]
        .as_f64()
        .context("checkpoint.json lacks alpha")?;
    let adapters_path = args.checkpoint.join(
        checkpoint["adapter_artifact"]
            .as_str()
            .unwrap_or("adapters.json"),
    );
    let params: Vec<f64> = serde_json::from_str(
        &std::fs::read_to_string(&adapters_path)
            .with_context(|| format!("read {}", adapters_path.display()))?,
    )?;

    // the provider is rebuilt against the full corpus, then the trained
    // parameters are restored into it
    let mut provider = trainable_provider(&corpus, resolved)?;
    provider.set_params(&params)?;
    let irt = IRTParams::with_alpha(alpha);

    let selected = Corpus {
        dialogues: corpus
            .dialogues
            .iter()
            .filter(|d| match args.split {
                SplitArg::All => true,
                SplitArg::Train => d.split_tag == SplitTag::Train,
                SplitArg::Validation => d.split_tag == SplitTag::Validation,
                SplitArg::Test => d.split_tag == SplitTag::Test,
            })
            .cloned()
            .collect(),
        kc_catalog: corpus.kc_catalog.clone(),
    };

    let records = build_prediction_records(&selected, provider.as_ref(), &irt)?;
    let report = evaluate_records(&records, resolved.threshold)?;

    let report_path = write_json(out, "report.json", &report)?;
    let predictions_path = out.join("predictions.csv");
    std::fs::write(&predictions_path, export_predictions_csv(&records))
        .with_context(|| format!("write {}", predictions_path.display()))?;

    let mut manifest = ManifestBuilder::new("eval", resolved.snapshot(), resolved.seed);
    manifest.input(&args.corpus);
    if let Some(catalog) = &args.catalog {
        manifest.input(catalog);
    }
    manifest
        .input(&checkpoint_path)
        .input(&adapters_path)
        .output(&report_path)
        .output(&predictions_path);
    manifest.write(out)?;

    println!(
        "auc {:.4}, accuracy {:.4} over {} evaluated labels ({} records) -> {}",
        report.auc,
        report.accuracy,
        report.n_evaluated,
        records.len(),
        report_path.display()
    );
    Ok(())
}
