//! `dikt simulate`: synthetic corpus plus ground-truth sidecar.

use anyhow::Result;
use clap::{Args, ValueEnum};

use dikt_core::simulate::{generate_corpus, AbilityProcess, SimConfig};

use crate::config::Resolved;
use crate::manifest::ManifestBuilder;

use super::ensure_out_dir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureArg {
    /// Recovery fixture: two ability lobes, decisive gaps.
    Recovery,
    /// Agreement fixture: moderate gaps, KC difficulty spread.
    Agreement,
    /// Learning-curve fixture: deterministic linear ability growth.
    LearningCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AbilityArg {
    Constant,
    Linear,
    Power,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Start from a named fixture configuration.
    #[arg(long, value_enum)]
    pub fixture: Option<FixtureArg>,
    #[arg(long)]
    pub dialogues: Option<usize>,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub kcs: Option<usize>,
    #[arg(long)]
    pub kcs_per_dialogue: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Ability process shape (fixture-tuned parameters).
    #[arg(long, value_enum)]
    pub ability: Option<AbilityArg>,
}

pub fn run(args: &SimulateArgs, resolved: &Resolved) -> Result<()> {
    let out = ensure_out_dir(resolved)?;
    let mut cfg = match args.fixture {
        Some(FixtureArg::Recovery) | None => SimConfig::recovery_fixture(),
        Some(FixtureArg::Agreement) => SimConfig::agreement_fixture(),
        Some(FixtureArg::LearningCurve) => SimConfig::learning_curve_fixture(),
    };
    cfg.seed = resolved.seed;
    if let Some(n) = args.dialogues {
        cfg.n_dialogues = n;
    }
    if let Some(n) = args.pairs {
        cfg.pairs_per_dialogue = n;
    }
    if let Some(n) = args.kcs {
        cfg.n_kcs = n;
    }
    if let Some(n) = args.kcs_per_dialogue {
        cfg.kcs_per_dialogue = n;
    }
    if let Some(a) = args.alpha {
        cfg.alpha_true = a;
    }
    if let Some(shape) = args.ability {
        cfg.ability = match shape {
            AbilityArg::Constant => AbilityProcess::Constant {
                levels: vec![-3.5, 3.5],
            },
            AbilityArg::Linear => AbilityProcess::LinearGrowth {
                start: -2.4,
                rate: 0.4,
            },
            AbilityArg::Power => AbilityProcess::PowerLawGrowth {
                start: 0.2,
                gain: 1.2,
                exponent: 0.5,
            },
        };
    }

    let (corpus, truth) = generate_corpus(&cfg)?;
    let corpus_path = out.join("corpus.jsonl");
    let catalog_path = out.join("kc_catalog.json");
    let truth_path = out.join("ground_truth.json");
    corpus.save(&corpus_path, Some(&catalog_path))?;
    truth.save(&truth_path)?;

    let mut manifest = ManifestBuilder::new("simulate", resolved.snapshot(), resolved.seed);
    manifest
        .output(&corpus_path)
        .output(&catalog_path)
        .output(&truth_path);
    manifest.write(out)?;

    println!(
        "simulated {} dialogues x {} pairs over {} KCs (alpha_true {}) -> {}",
        cfg.n_dialogues,
        cfg.pairs_per_dialogue,
        cfg.n_kcs,
        cfg.alpha_true,
        corpus_path.display()
    );
    Ok(())
}
