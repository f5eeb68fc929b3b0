//! Option resolution: command-line flags override the config file, which
//! overrides built-in defaults. Environment variables with the `DIKT_`
//! prefix slot in between flags and the file (clap applies them when the
//! flag is absent).

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use dikt_core::irt::LossReduction;
use dikt_core::trainer::TrainConfig;

use crate::{DisplayArg, MasteryArg, ProviderArg};

/// TOML config file mirroring the global flags, plus an optional `[train]`
/// table covering the remaining training hyperparameters.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub provider: Option<ProviderArg>,
    pub model_id: Option<String>,
    pub lr: Option<f64>,
    pub rank: Option<usize>,
    pub epochs: Option<usize>,
    pub threshold: Option<f64>,
    pub min_kc_count: Option<usize>,
    pub mastery_source: Option<MasteryArg>,
    pub display: Option<DisplayArg>,
    pub val_fraction: Option<f64>,
    #[serde(default)]
    pub train: TrainOverrides,
}

/// Per-field training overrides; unset fields keep the flag-resolved or
/// built-in values.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    pub learning_rate: Option<f64>,
    pub adapter_rank: Option<usize>,
    pub adapter_scaling: Option<usize>,
    pub effective_batch_size: Option<usize>,
    pub micro_batch_size: Option<usize>,
    pub grad_clip_norm: Option<f64>,
    pub epochs: Option<usize>,
    pub weight_decay: Option<f64>,
    pub seed: Option<u64>,
    pub loss_reduction: Option<LossReduction>,
}

impl TrainOverrides {
    pub fn apply(&self, base: TrainConfig) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate.unwrap_or(base.learning_rate),
            adapter_rank: self.adapter_rank.unwrap_or(base.adapter_rank),
            adapter_scaling: self.adapter_scaling.unwrap_or(base.adapter_scaling),
            effective_batch_size: self
                .effective_batch_size
                .unwrap_or(base.effective_batch_size),
            micro_batch_size: self.micro_batch_size.unwrap_or(base.micro_batch_size),
            grad_clip_norm: self.grad_clip_norm.unwrap_or(base.grad_clip_norm),
            epochs: self.epochs.unwrap_or(base.epochs),
            weight_decay: self.weight_decay.unwrap_or(base.weight_decay),
            seed: self.seed.unwrap_or(base.seed),
            loss_reduction: self.loss_reduction.unwrap_or(base.loss_reduction),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("config {}", path.display()))
    }
}

/// Effective option values after precedence resolution.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub provider: ProviderArg,
    pub model_id: String,
    pub lr: f64,
    pub rank: usize,
    pub epochs: usize,
    pub threshold: f64,
    pub min_kc_count: usize,
    pub mastery_source: MasteryArg,
    pub display: DisplayArg,
    pub val_fraction: f64,
    /// `[train]` table from the config file.
    pub train_overrides: TrainOverrides,
    /// Values given on the command line (or environment); these beat the
    /// `[train]` table.
    pub cli_lr: Option<f64>,
    pub cli_rank: Option<usize>,
    pub cli_epochs: Option<usize>,
    pub cli_seed: Option<u64>,
}

impl Resolved {
    pub fn merge(cli: &crate::CommonOpts, file: &FileConfig) -> Resolved {
        Resolved {
            train_overrides: file.train.clone(),
            cli_lr: cli.lr,
            cli_rank: cli.rank,
            cli_epochs: cli.epochs,
            cli_seed: cli.seed,
            seed: cli.seed.or(file.seed).unwrap_or(7),
            out: cli.out.clone().or_else(|| file.out.clone()),
            provider: cli
                .provider
                .or(file.provider)
                .unwrap_or(ProviderArg::Direct),
            model_id: cli
                .model_id
                .clone()
                .or_else(|| file.model_id.clone())
                .unwrap_or_default(),
            lr: cli.lr.or(file.lr).unwrap_or(0.08),
            rank: cli.rank.or(file.rank).unwrap_or(16),
            epochs: cli.epochs.or(file.epochs).unwrap_or(60),
            threshold: cli.threshold.or(file.threshold).unwrap_or(0.5),
            min_kc_count: cli.min_kc_count.or(file.min_kc_count).unwrap_or(5),
            mastery_source: cli
                .mastery_source
                .or(file.mastery_source)
                .unwrap_or(MasteryArg::SigmoidTheta),
            display: cli.display.or(file.display).unwrap_or(DisplayArg::Sigmoid),
            val_fraction: cli.val_fraction.or(file.val_fraction).unwrap_or(0.1),
        }
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| anyhow::anyhow!("--out <dir> is required (or set `out` in the config)"))
    }

    /// The effective training configuration: built-in defaults under the
    /// shortcut values, then the `[train]` table, then explicit
    /// command-line values on top.
    pub fn train_config(&self) -> TrainConfig {
        let base = TrainConfig {
            learning_rate: self.lr,
            adapter_rank: self.rank,
            epochs: self.epochs,
            seed: self.seed,
            ..TrainConfig::default()
        };
        let mut cfg = self.train_overrides.apply(base);
        if let Some(v) = self.cli_lr {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.cli_rank {
            cfg.adapter_rank = v;
        }
        if let Some(v) = self.cli_epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.cli_seed {
            cfg.seed = v;
        }
        cfg
    }

    /// Snapshot of the effective values for the run manifest.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "out": self.out.as_ref().map(|p| p.display().to_string()),
            "provider": format!("{:?}", self.provider).to_lowercase(),
            "model_id": self.model_id,
            "lr": self.lr,
            "rank": self.rank,
            "epochs": self.epochs,
            "threshold": self.threshold,
            "min_kc_count": self.min_kc_count,
            "mastery_source": format!("{:?}", self.mastery_source),
            "display": format!("{:?}", self.display),
            "val_fraction": self.val_fraction,
        })
    }
}
