//! Direct-parameter provider: one trainable scalar per (dialogue, pair,
//! prompt kind).
//!
//! Scoring returns the scalar as `z_positive` with `z_negative` fixed at 0,
//! so the estimate IS the parameter. The chain rule through the provider is
//! the identity, which makes this the exact-gradient backend for isolating
//! the IRT layer and for simulation-based parameter recovery.

use std::collections::HashMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::estimator::kc_names_for;
use crate::hash::fnv1a64;
use crate::prompts::{build_difficulty_prompt, build_knowledge_prompt, PromptText};

use super::{Capabilities, LogitProvider, LogitScores, TokenPair, TrainableLogitProvider};

#[derive(Debug, Clone)]
pub struct DirectProvider {
    /// Prompt hash → parameter index.
    index: HashMap<u64, usize>,
    params: Vec<f64>,
    /// `(dialogue_id, pair_index, kind)` per parameter, for diagnostics.
    labels: Vec<String>,
}

impl DirectProvider {
    /// Size the provider to a corpus: render the knowledge and difficulty
    /// prompts of every labeled pair and allocate one parameter per prompt,
    /// initialized to 0. Fails if two prompts collide, which would mean two
    /// (dialogue, pair, kind) cells cannot be told apart.
    pub fn for_corpus(corpus: &Corpus) -> Result<DirectProvider> {
        let mut provider = DirectProvider {
            index: HashMap::new(),
            params: Vec::new(),
            labels: Vec::new(),
        };
        for dialogue in &corpus.dialogues {
            for pair in dialogue.turn_pairs()? {
                let Some(label) = pair.label else { continue };
                let history = dialogue.history_before_pair(pair.pair_index);
                let kc_names = kc_names_for(&label.kc_ids, &corpus.kc_catalog)?;
                let knowledge = build_knowledge_prompt(&dialogue.question_text, history)?;
                let difficulty = build_difficulty_prompt(
                    &dialogue.question_text,
                    history,
                    pair.tutor,
                    &kc_names,
                )?;
                provider.register(
                    &knowledge,
                    format!("{}/{}/knowledge", dialogue.dialogue_id, pair.pair_index),
                )?;
                provider.register(
                    &difficulty,
                    format!("{}/{}/difficulty", dialogue.dialogue_id, pair.pair_index),
                )?;
            }
        }
        Ok(provider)
    }

    fn register(&mut self, prompt: &PromptText, label: String) -> Result<()> {
        let key = fnv1a64(prompt.text.as_bytes());
        if let Some(&existing) = self.index.get(&key) {
            return Err(Error::Provider(format!(
                "prompt hash collision between `{}` and `{label}`; \
                 dialogue texts must make every (dialogue, pair) prompt unique",
                self.labels[existing]
            )));
        }
        self.index.insert(key, self.params.len());
        self.params.push(0.0);
        self.labels.push(label);
        Ok(())
    }

    fn param_index(&self, prompt: &PromptText) -> Result<usize> {
        self.index
            .get(&fnv1a64(prompt.text.as_bytes()))
            .copied()
            .ok_or_else(|| {
                Error::Provider("prompt was not registered with this provider".to_string())
            })
    }
}

impl LogitProvider for DirectProvider {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            trainable: true,
            batchable: true,
        }
    }

    fn score(&self, prompt: &PromptText, _tokens: &TokenPair) -> Result<LogitScores> {
        let idx = self.param_index(prompt)?;
        Ok(LogitScores {
            z_positive: self.params[idx],
            z_negative: 0.0,
        })
    }
}

impl TrainableLogitProvider for DirectProvider {
    fn param_count(&self) -> usize {
        self.params.len()
    }

    fn params(&self) -> Vec<f64> {
        self.params.clone()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::ShapeMismatch(format!(
                "provider has {} params, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn accumulate_estimate_grad(
        &self,
        prompt: &PromptText,
        _tokens: &TokenPair,
        upstream: f64,
        grads: &mut [f64],
    ) -> Result<()> {
        let idx = self.param_index(prompt)?;
        grads[idx] += upstream;
        Ok(())
    }
}
