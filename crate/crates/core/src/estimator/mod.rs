//! Scoring abstraction: a [`LogitProvider`] turns a prompt into a pair of
//! next-token logits, and the estimate operations turn logit pairs into
//! scalar ability and difficulty values.
//!
//! Three backends implement the interface:
//! - [`MockProvider`]: deterministic lookup keyed by a stable hash of the
//!   prompt text; test fixtures are plain JSON files of hash → logit pairs.
//! - [`DirectProvider`]: one trainable scalar per (dialogue, pair, prompt
//!   kind); isolates the IRT/optimization path from language modeling and is
//!   the backend used for simulation-based parameter recovery.
//! - [`TinyByteLm`]: a self-contained byte-level causal transformer with
//!   low-rank adapters, the desk-scale stand-in for a full language model.

mod direct;
mod mock;
mod tiny_lm;

pub use direct::DirectProvider;
pub use mock::MockProvider;
pub use tiny_lm::{TinyByteLm, TinyLmConfig};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Dialogue, Turn};
use crate::error::{Error, Result};
use crate::prompts::{build_difficulty_prompt, build_knowledge_prompt, PromptText};

// ---------------------------------------------------------------------------
// Tokens and scores
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionRule {
    /// The token must map to a single vocabulary id; a leading-space form is
    /// tried first. Providers that cannot satisfy this fall back to
    /// `FirstSubtoken` with a logged warning.
    ExactSingleToken,
    /// Use the first sub-token id of the tokenized form.
    FirstSubtoken,
}

/// The positive/negative vocabulary tokens whose logit difference forms an
/// estimate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenPair {
    pub positive_token: String,
    pub negative_token: String,
    pub resolution_rule: ResolutionRule,
}

impl TokenPair {
    pub fn new(positive: &str, negative: &str, rule: ResolutionRule) -> Result<TokenPair> {
        if positive == negative {
            return Err(Error::TokenResolution {
                token: positive.to_string(),
            });
        }
        Ok(TokenPair {
            positive_token: positive.to_string(),
            negative_token: negative.to_string(),
            resolution_rule: rule,
        })
    }

    /// `GOOD` / `BAD`, the ability menu.
    pub fn good_bad() -> TokenPair {
        TokenPair::new("GOOD", "BAD", ResolutionRule::ExactSingleToken).expect("distinct")
    }

    /// `HARD` / `EASY`, the difficulty menu.
    pub fn hard_easy() -> TokenPair {
        TokenPair::new("HARD", "EASY", ResolutionRule::ExactSingleToken).expect("distinct")
    }
}

/// Next-token logits for the two resolved tokens at the final prompt
/// position. Raw pre-softmax values; only the difference matters downstream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogitScores {
    pub z_positive: f64,
    pub z_negative: f64,
}

impl LogitScores {
    pub fn difference(&self) -> f64 {
        self.z_positive - self.z_negative
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub trainable: bool,
    pub batchable: bool,
}

// ---------------------------------------------------------------------------
// Provider interface
// ---------------------------------------------------------------------------

/// Anything that can score a prompt and return a pair of token logits.
///
/// Scoring must be deterministic given fixed provider state: no sampling, no
/// hidden randomness. A frozen provider is safe to share across threads.
pub trait LogitProvider: Send + Sync {
    fn capabilities(&self) -> Capabilities;

    fn score(&self, prompt: &PromptText, tokens: &TokenPair) -> Result<LogitScores>;

    /// Batch contract; the default loops over [`LogitProvider::score`].
    fn score_batch(&self, requests: &[(&PromptText, &TokenPair)]) -> Result<Vec<LogitScores>> {
        requests.iter().map(|(p, t)| self.score(p, t)).collect()
    }
}

/// A provider whose parameters the trainer may optimize. Exactly one trainer
/// owns a trainable provider at a time.
pub trait TrainableLogitProvider: LogitProvider {
    fn param_count(&self) -> usize;

    fn params(&self) -> Vec<f64>;

    fn set_params(&mut self, params: &[f64]) -> Result<()>;

    /// Accumulate `∂loss/∂params` into `grads`, where `upstream` is
    /// `∂loss/∂(z_positive − z_negative)` for this prompt.
    fn accumulate_estimate_grad(
        &self,
        prompt: &PromptText,
        tokens: &TokenPair,
        upstream: f64,
        grads: &mut [f64],
    ) -> Result<()>;
}

// ---------------------------------------------------------------------------
// Provider configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Lm,
    Mock,
    Direct,
}

/// Configuration block for constructing a provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub backend: BackendKind,
    /// For `lm`: path to a weights file ("" uses the built-in seeded
    /// initialization). For `mock`: path to a fixture table.
    #[serde(default)]
    pub model_id: String,
    #[serde(default = "default_rank")]
    pub adapter_rank: usize,
    #[serde(default = "default_scaling")]
    pub adapter_scaling: usize,
    #[serde(default = "default_context")]
    pub max_context_tokens: usize,
    /// Override for the ability token menu.
    #[serde(default)]
    pub knowledge_tokens: Option<TokenPair>,
    /// Override for the difficulty token menu.
    #[serde(default)]
    pub difficulty_tokens: Option<TokenPair>,
}

fn default_rank() -> usize {
    16
}
fn default_scaling() -> usize {
    16
}
fn default_context() -> usize {
    4096
}

impl ProviderConfig {
    pub fn new(backend: BackendKind) -> ProviderConfig {
        ProviderConfig {
            backend,
            model_id: String::new(),
            adapter_rank: default_rank(),
            adapter_scaling: default_scaling(),
            max_context_tokens: default_context(),
            knowledge_tokens: None,
            difficulty_tokens: None,
        }
    }

    pub fn knowledge_tokens(&self) -> TokenPair {
        self.knowledge_tokens
            .clone()
            .unwrap_or_else(TokenPair::good_bad)
    }

    pub fn difficulty_tokens(&self) -> TokenPair {
        self.difficulty_tokens
            .clone()
            .unwrap_or_else(TokenPair::hard_easy)
    }

    /// Construct the provider this block describes. The direct backend is
    /// sized to a corpus; the others ignore it.
    pub fn build(&self, corpus: Option<&Corpus>) -> Result<Box<dyn LogitProvider>> {
        match self.backend {
            BackendKind::Mock => {
                if self.model_id.is_empty() {
                    Ok(Box::new(MockProvider::default()))
                } else {
                    Ok(Box::new(MockProvider::from_file(std::path::Path::new(
                        &self.model_id,
                    ))?))
                }
            }
            BackendKind::Direct => {
                let corpus = corpus.ok_or_else(|| {
                    Error::Provider("the direct backend needs a corpus to size itself".to_string())
                })?;
                Ok(Box::new(DirectProvider::for_corpus(corpus)?))
            }
            BackendKind::Lm => {
                let cfg = TinyLmConfig {
                    adapter_rank: self.adapter_rank,
                    adapter_scaling: self.adapter_scaling,
                    max_context_bytes: self.max_context_tokens,
                    ..TinyLmConfig::default()
                };
                if self.model_id.is_empty() {
                    Ok(Box::new(TinyByteLm::new(cfg)))
                } else {
                    Ok(Box::new(TinyByteLm::from_weights_file(
                        std::path::Path::new(&self.model_id),
                        cfg,
                    )?))
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Estimates
// ---------------------------------------------------------------------------

/// Per-turn interpretable output: ability, difficulty, and (once the IRT
/// layer has run) the predicted correctness probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnEstimate {
    pub pair_index: usize,
    pub theta: f64,
    pub d: f64,
    pub r_hat: Option<f64>,
}

/// Ability estimate for the pair following `history`: the GOOD−BAD logit
/// difference on the knowledge prompt.
pub fn estimate_ability(
    provider: &dyn LogitProvider,
    question_text: &str,
    history: &[Turn],
) -> Result<f64> {
    estimate_ability_with(provider, question_text, history, &TokenPair::good_bad())
}

pub fn estimate_ability_with(
    provider: &dyn LogitProvider,
    question_text: &str,
    history: &[Turn],
    tokens: &TokenPair,
) -> Result<f64> {
    let prompt = build_knowledge_prompt(question_text, history)?;
    Ok(provider.score(&prompt, tokens)?.difference())
}

/// Difficulty estimate for `next_tutor_turn`: the HARD−EASY logit difference
/// on the difficulty prompt.
pub fn estimate_difficulty(
    provider: &dyn LogitProvider,
    question_text: &str,
    history: &[Turn],
    next_tutor_turn: &Turn,
    kc_names: &[String],
) -> Result<f64> {
    estimate_difficulty_with(
        provider,
        question_text,
        history,
        next_tutor_turn,
        kc_names,
        &TokenPair::hard_easy(),
    )
}

pub fn estimate_difficulty_with(
    provider: &dyn LogitProvider,
    question_text: &str,
    history: &[Turn],
    next_tutor_turn: &Turn,
    kc_names: &[String],
    tokens: &TokenPair,
) -> Result<f64> {
    let prompt = build_difficulty_prompt(question_text, history, next_tutor_turn, kc_names)?;
    Ok(provider.score(&prompt, tokens)?.difference())
}

/// Resolve a label's KC ids to display names via the catalog.
pub fn kc_names_for(
    kc_ids: &[String],
    kc_catalog: &BTreeMap<String, String>,
) -> Result<Vec<String>> {
    kc_ids
        .iter()
        .map(|id| {
            kc_catalog
                .get(id)
                .cloned()
                .ok_or_else(|| Error::UnknownKC(id.clone()))
        })
        .collect()
}

/// One estimate per labeled pair, in pair order.
///
/// The ability prompt for pair `j+1` conditions on turns up to `s_j`; the
/// difficulty prompt additionally sees the tutor turn `t_{j+1}` it scores.
/// Unlabeled pairs produce no estimate but remain in later prompts' history.
pub fn estimate_dialogue(
    provider: &dyn LogitProvider,
    dialogue: &Dialogue,
    kc_catalog: &BTreeMap<String, String>,
) -> Result<Vec<TurnEstimate>> {
    estimate_dialogue_with(
        provider,
        dialogue,
        kc_catalog,
        &TokenPair::good_bad(),
        &TokenPair::hard_easy(),
    )
}

pub fn estimate_dialogue_with(
    provider: &dyn LogitProvider,
    dialogue: &Dialogue,
    kc_catalog: &BTreeMap<String, String>,
    knowledge_tokens: &TokenPair,
    difficulty_tokens: &TokenPair,
) -> Result<Vec<TurnEstimate>> {
    let pairs = dialogue.turn_pairs()?;
    let mut estimates = Vec::new();
    for pair in &pairs {
        let Some(label) = pair.label else { continue };
        let history = dialogue.history_before_pair(pair.pair_index);
        let kc_names = kc_names_for(&label.kc_ids, kc_catalog)?;
        let knowledge = build_knowledge_prompt(&dialogue.question_text, history)?;
        let difficulty =
            build_difficulty_prompt(&dialogue.question_text, history, pair.tutor, &kc_names)?;
        let theta = provider.score(&knowledge, knowledge_tokens)?.difference();
        let d = provider.score(&difficulty, difficulty_tokens)?.difference();
        estimates.push(TurnEstimate {
            pair_index: pair.pair_index,
            theta,
            d,
            r_hat: None,
        });
    }
    Ok(estimates)
}
