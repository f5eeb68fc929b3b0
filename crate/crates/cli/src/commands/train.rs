//! `dikt train`: fine-tune on correctness with a held-out validation split,
//! optionally across the hyperparameter grid.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use dikt_core::trainer::{
    default_grid, fine_tune, grid_search, select_checkpoint, Checkpoint, TrainConfig, TrainHistory,
};
use dikt_core::{split_validation, Corpus, IRTParams};

use crate::config::Resolved;
use crate::manifest::ManifestBuilder;

use super::{ensure_out_dir, trainable_provider, write_json};

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Search the full learning-rate x rank grid instead of one config.
    #[arg(long)]
    pub grid: bool,
}

/// checkpoint.json: the epoch, alpha, the adapter artifact locator, a config
/// echo, the seed, and the selected epoch's validation metrics.
fn checkpoint_manifest(
    checkpoint: &Checkpoint,
    history: &TrainHistory,
    cfg: &TrainConfig,
) -> serde_json::Value {
    let record = &history.epochs[checkpoint.epoch - 1];
    serde_json::json!({
        "epoch": checkpoint.epoch,
        "alpha": checkpoint.alpha,
        "adapter_artifact": "adapters.json",
        "config": cfg,
        "seed": cfg.seed,
        "validation": {
            "auc": record.validation_auc,
            "accuracy": record.validation_accuracy,
        },
    })
}

pub fn run(args: &TrainArgs, resolved: &Resolved) -> Result<()> {
    let out = ensure_out_dir(resolved)?;
    let corpus = Corpus::load(&args.corpus, args.catalog.as_deref())?;
    let (train, validation) = split_validation(&corpus, resolved.val_fraction, resolved.seed)?;

    let cfg = resolved.train_config();
    let (best_cfg, checkpoint, history, grid_table) = if args.grid {
        let grid = default_grid(resolved.seed);
        let mut factory = |cell_cfg: &TrainConfig| -> dikt_core::Result<_> {
            let resolved_cell = Resolved {
                rank: cell_cfg.adapter_rank,
                ..resolved.clone()
            };
            trainable_provider(&corpus, &resolved_cell)
                .map_err(|e| dikt_core::Error::Provider(format!("{e:#}")))
        };
        let outcome = grid_search(&train, &validation, &grid, &mut factory)?;
        (
            outcome.best_config,
            outcome.best_checkpoint,
            outcome.best_history,
            Some(outcome.table),
        )
    } else {
        let mut provider = trainable_provider(&corpus, resolved)?;
        let mut irt = IRTParams::default();
        let history = fine_tune(&train, &validation, provider.as_mut(), &mut irt, &cfg)?;
        let checkpoint = select_checkpoint(&history)?.clone();
        (cfg.clone(), checkpoint, history, None)
    };

    let adapters_path = write_json(out, "adapters.json", &checkpoint.provider_params)?;
    let checkpoint_path = write_json(
        out,
        "checkpoint.json",
        &checkpoint_manifest(&checkpoint, &history, &best_cfg),
    )?;
    let history_path = write_json(out, "history.json", &history)?;

    // line-delimited training log, one record per epoch
    let log_path = out.join("training_log.jsonl");
    let mut log = String::new();
    for record in &history.epochs {
        log.push_str(&serde_json::to_string(&serde_json::json!({
            "epoch": record.epoch,
            "train_loss": record.train_loss,
            "validation_auc": record.validation_auc,
            "validation_accuracy": record.validation_accuracy,
            "max_clipped_grad_norm": record.max_clipped_grad_norm,
        }))?);
        log.push('\n');
    }
    std::fs::write(&log_path, log).with_context(|| format!("write {}", log_path.display()))?;

    let mut manifest = ManifestBuilder::new("train", resolved.snapshot(), resolved.seed);
    manifest.input(&args.corpus);
    if let Some(catalog) = &args.catalog {
        manifest.input(catalog);
    }
    manifest
        .output(&adapters_path)
        .output(&checkpoint_path)
        .output(&history_path)
        .output(&log_path);
    let mut grid_path = None;
    if let Some(table) = &grid_table {
        let path = write_json(out, "grid_table.json", table)?;
        manifest.output(&path);
        grid_path = Some(path);
    }
    manifest.write(out)?;

    let record = &history.epochs[checkpoint.epoch - 1];
    println!(
        "selected epoch {} (validation AUC {:.4}, accuracy {:.4}, alpha {:.4}) -> {}",
        checkpoint.epoch,
        record.validation_auc,
        record.validation_accuracy,
        checkpoint.alpha,
        checkpoint_path.display()
    );
    if let Some(path) = grid_path {
        println!("grid results -> {}", path.display());
    }
    Ok(())
}
