//! `dikt recover`: fit per-pair parameters on a simulated corpus with the
//! direct provider and score the fit against the generating truth.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use dikt_core::simulate::{
    fit_alpha_to_truth, recover_parameters, recovery_report, recovery_train_config, GroundTruth,
};
use dikt_core::Corpus;

use crate::config::Resolved;
use crate::manifest::ManifestBuilder;

use super::{ensure_out_dir, write_json};

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub catalog: PathBuf,
    /// Ground-truth sidecar written by `simulate`.
    #[arg(long)]
    pub truth: PathBuf,
}

pub fn run(args: &RecoverArgs, resolved: &Resolved) -> Result<()> {
    let out = ensure_out_dir(resolved)?;
    let corpus = Corpus::load(&args.corpus, Some(&args.catalog))?;
    let truth = GroundTruth::load(&args.truth)?;

    let mut cfg = recovery_train_config(resolved.seed);
    cfg.learning_rate = resolved.lr;
    cfg.epochs = resolved.epochs;
    let cfg = resolved.train_overrides.apply(cfg);
    let fit = recover_parameters(&corpus, &cfg)?;
    let report = recovery_report(&truth, &fit)?;
    let alpha_frozen = fit_alpha_to_truth(&truth, &corpus)?;
    let frozen_rel = if truth.alpha_true == 0.0 {
        (alpha_frozen - truth.alpha_true).abs()
    } else {
        (alpha_frozen - truth.alpha_true).abs() / truth.alpha_true.abs()
    };

    let summary = serde_json::json!({
        "gap_pearson": report.gap_pearson,
        "probability_mae": report.probability_mae,
        "alpha_true": truth.alpha_true,
        "alpha_joint": fit.irt.alpha,
        "alpha_joint_rel_error": report.alpha_rel_error,
        "alpha_frozen_truth": alpha_frozen,
        "alpha_frozen_truth_rel_error": frozen_rel,
        "pairs": fit.pairs.len(),
        "epochs": cfg.epochs,
        "learning_rate": cfg.learning_rate,
    });
    let summary_path = write_json(out, "recovery.json", &summary)?;

    let mut csv = String::from("dialogue_id,pair_index,theta,d,r_hat\n");
    for p in &fit.pairs {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            p.dialogue_id, p.pair_index, p.theta, p.d, p.r_hat
        ));
    }
    let fitted_path = out.join("fitted_pairs.csv");
    std::fs::write(&fitted_path, csv)
        .with_context(|| format!("write {}", fitted_path.display()))?;

    let mut manifest = ManifestBuilder::new("recover", resolved.snapshot(), resolved.seed);
    manifest
        .input(&args.corpus)
        .input(&args.catalog)
        .input(&args.truth)
        .output(&summary_path)
        .output(&fitted_path);
    manifest.write(out)?;

    println!(
        "gap pearson {:.4}, probability MAE {:.4}, frozen-truth alpha {:.4} (rel err {:.4}) -> {}",
        report.gap_pearson,
        report.probability_mae,
        alpha_frozen,
        frozen_rel,
        summary_path.display()
    );
    Ok(())
}
