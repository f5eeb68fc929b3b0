pub mod analyze;
pub mod eval;
pub mod ingest;
pub mod plot;
pub mod recover;
pub mod simulate;
pub mod train;

use std::path::Path;

use anyhow::{Context, Result};

use dikt_core::estimator::{TinyByteLm, TinyLmConfig, TrainableLogitProvider};
use dikt_core::{Corpus, DirectProvider};

use crate::config::Resolved;
use crate::ProviderArg;

pub fn ensure_out_dir(resolved: &Resolved) -> Result<&Path> {
    let dir = resolved.out_dir()?;
    std::fs::create_dir_all(dir).with_context(|| format!("create {}", dir.display()))?;
    Ok(dir)
}

pub fn write_json<T: serde::Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
) -> Result<std::path::PathBuf> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).context("serialize")?;
    std::fs::write(&path, text + "\n").with_context(|| format!("write {}", path.display()))?;
    Ok(path)
}

fn tiny_lm_config(resolved: &Resolved) -> TinyLmConfig {
    TinyLmConfig {
        adapter_rank: resolved.rank,
        ..TinyLmConfig::default()
    }
}

/// Build a trainable provider for a corpus per the `--provider` choice.
pub fn trainable_provider(
    corpus: &Corpus,
    resolved: &Resolved,
) -> Result<Box<dyn TrainableLogitProvider>> {
    match resolved.provider {
        ProviderArg::Direct => Ok(Box::new(DirectProvider::for_corpus(corpus)?)),
        ProviderArg::Lm => {
            let cfg = tiny_lm_config(resolved);
            let lm = if resolved.model_id.is_empty() {
                TinyByteLm::new(cfg)
            } else {
                TinyByteLm::from_weights_file(Path::new(&resolved.model_id), cfg)?
            };
            Ok(Box::new(lm))
        }
        ProviderArg::Mock => Err(dikt_core::Error::Provider(
            "the mock provider is not trainable; use --provider direct or lm".to_string(),
        )
        .into()),
    }
}
