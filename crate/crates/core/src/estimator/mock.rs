//! Deterministic mock provider keyed by a stable hash of the prompt text.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hash::fnv1a64_hex;
use crate::prompts::PromptText;

use super::{Capabilities, LogitProvider, LogitScores, TokenPair};

/// Lookup-table provider for tests and pipeline dry runs.
///
/// Fixture files are JSON maps from prompt hash (the 16-hex-digit FNV-1a of
/// the prompt text) to `[z_positive, z_negative]`. A `fallback` entry, when
/// set, answers prompts missing from the table.
#[derive(Debug, Clone, Default)]
pub struct MockProvider {
    table: BTreeMap<String, (f64, f64)>,
    fallback: Option<(f64, f64)>,
}

impl MockProvider {
    /// Answers every prompt with the same logit pair.
    pub fn constant(z_positive: f64, z_negative: f64) -> MockProvider {
        MockProvider {
            table: BTreeMap::new(),
            fallback: Some((z_positive, z_negative)),
        }
    }

    pub fn from_table(table: BTreeMap<String, (f64, f64)>) -> MockProvider {
        MockProvider {
            table,
            fallback: None,
        }
    }

    /// Load a fixture table: `{"<hash>": [z_pos, z_neg], ...}`.
    pub fn from_file(path: &Path) -> Result<MockProvider> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Provider(format!("cannot read {}: {e}", path.display())))?;
        let raw: BTreeMap<String, (f64, f64)> = serde_json::from_str(&text)
            .map_err(|e| Error::Provider(format!("mock table {}: {e}", path.display())))?;
        Ok(MockProvider::from_table(raw))
    }

    /// Register a response for one exact prompt text.
    pub fn insert_prompt(&mut self, prompt_text: &str, z_positive: f64, z_negative: f64) {
        self.table.insert(
            fnv1a64_hex(prompt_text.as_bytes()),
            (z_positive, z_negative),
        );
    }

    pub fn set_fallback(&mut self, z_positive: f64, z_negative: f64) {
        self.fallback = Some((z_positive, z_negative));
    }

    /// The table in fixture-file form.
    pub fn table(&self) -> &BTreeMap<String, (f64, f64)> {
        &self.table
    }
}

impl LogitProvider for MockProvider {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            trainable: false,
            batchable: true,
        }
    }

    fn score(&self, prompt: &PromptText, _tokens: &TokenPair) -> Result<LogitScores> {
        let key = fnv1a64_hex(prompt.text.as_bytes());
        let (z_positive, z_negative) = self
            .table
            .get(&key)
            .copied()
            .or(self.fallback)
            .ok_or_else(|| Error::Provider(format!("no mock entry for prompt hash {key}")))?;
        Ok(LogitScores {
            z_positive,
            z_negative,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::build_knowledge_prompt;

    #[test]
    fn table_lookup_and_determinism() {
        let prompt = build_knowledge_prompt("q", &[]).unwrap();
        let mut provider = MockProvider::default();
        provider.insert_prompt(&prompt.text, 3.0, 1.0);
        let a = provider.score(&prompt, &TokenPair::good_bad()).unwrap();
        let b = provider.score(&prompt, &TokenPair::good_bad()).unwrap();
        assert_eq!(
            a,
            LogitScores {
                z_positive: 3.0,
                z_negative: 1.0
            }
        );
        assert_eq!(a, b);
    }

    #[test]
    fn missing_entry_without_fallback_is_an_error() {
        let prompt = build_knowledge_prompt("q", &[]).unwrap();
        let provider = MockProvider::from_table(BTreeMap::new());
        assert!(matches!(
            provider.score(&prompt, &TokenPair::good_bad()),
            Err(Error::Provider(_))
        ));
    }

    #[test]
    fn fixture_file_round_trip() {
        let prompt = build_knowledge_prompt("q", &[]).unwrap();
        let mut provider = MockProvider::default();
        provider.insert_prompt(&prompt.text, -1.5, 2.25);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mock.json");
        std::fs::write(
            &path,
            serde_json::to_string_pretty(provider.table()).unwrap(),
        )
        .unwrap();
        let loaded = MockProvider::from_file(&path).unwrap();
        let got = loaded.score(&prompt, &TokenPair::good_bad()).unwrap();
        assert_eq!(got.difference(), -3.75);
    }
}
