//! `dikt ingest`: raw transcripts → validated corpus.
//!
//! Raw records are JSONL like the corpus format, but carry an `utterances`
//! array that may contain consecutive same-speaker entries; ingestion merges
//! them into alternating turns and validates every invariant before writing.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Deserialize;

use dikt_core::corpus::{load_kc_catalog, AssessmentLabel, Speaker, SplitTag};
use dikt_core::{merge_consecutive_utterances, Corpus, Dialogue, Error};

use crate::config::Resolved;
use crate::manifest::ManifestBuilder;

use super::{ensure_out_dir, write_json};

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw transcript JSONL, one dialogue per line.
    #[arg(long)]
    pub raw: PathBuf,
    /// KC catalog JSON map; omitted ids fall back to an identity catalog.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Deserialize)]
struct RawUtterance {
    speaker: Speaker,
    text: String,
}

#[derive(Deserialize)]
struct RawDialogue {
    dialogue_id: String,
    question_text: String,
    utterances: Vec<RawUtterance>,
    #[serde(default)]
    labels: Vec<AssessmentLabel>,
    #[serde(default)]
    split_tag: Option<SplitTag>,
}

pub fn run(args: &IngestArgs, resolved: &Resolved) -> Result<()> {
    let out = ensure_out_dir(resolved)?;
    let text = std::fs::read_to_string(&args.raw)
        .with_context(|| format!("read {}", args.raw.display()))?;

    let mut corpus = Corpus::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawDialogue = serde_json::from_str(line).map_err(|e| Error::ParseError {
            line: i + 1,
            message: e.to_string(),
        })?;
        let utterances: Vec<(Speaker, String)> = raw
            .utterances
            .into_iter()
            .map(|u| (u.speaker, u.text))
            .collect();
        let turns = merge_consecutive_utterances(&utterances)?;
        corpus.dialogues.push(Dialogue {
            dialogue_id: raw.dialogue_id,
            question_text: raw.question_text,
            turns,
            labels: raw.labels,
            split_tag: raw.split_tag.unwrap_or(SplitTag::Train),
        });
    }

    corpus.kc_catalog = match &args.catalog {
        Some(path) => load_kc_catalog(path)?,
        None => {
            let mut identity = BTreeMap::new();
            for d in &corpus.dialogues {
                for label in &d.labels {
                    for kc in &label.kc_ids {
                        identity.insert(kc.clone(), kc.clone());
                    }
                }
            }
            identity
        }
    };

    let violations = corpus.validate();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        return Err(Error::InvariantViolation {
            dialogue_id: "corpus".to_string(),
            first: format!("{} violations (listed on stderr)", violations.len()),
        }
        .into());
    }

    let corpus_path = out.join("corpus.jsonl");
    let catalog_path = out.join("kc_catalog.json");
    corpus.save(&corpus_path, Some(&catalog_path))?;
    let stats = serde_json::json!({
        "dialogues": corpus.dialogues.len(),
        "labels": corpus.label_count(),
        "kcs": corpus.kc_catalog.len(),
    });
    let stats_path = write_json(out, "ingest_stats.json", &stats)?;

    let mut manifest = ManifestBuilder::new("ingest", resolved.snapshot(), resolved.seed);
    manifest.input(&args.raw);
    if let Some(catalog) = &args.catalog {
        manifest.input(catalog);
    }
    manifest
        .output(&corpus_path)
        .output(&catalog_path)
        .output(&stats_path);
    manifest.write(out)?;

    println!(
        "ingested {} dialogues, {} labels, {} KCs -> {}",
        corpus.dialogues.len(),
        corpus.label_count(),
        corpus.kc_catalog.len(),
        corpus_path.display()
    );
    Ok(())
}
