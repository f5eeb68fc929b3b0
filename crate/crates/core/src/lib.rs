//! Difficulty-aware interpretable knowledge tracing for tutoring dialogues.
//!
//! The pipeline estimates a per-turn student ability `θ` and tutor-task
//! difficulty `d` from dialogue text via paired next-token logit
//! differences, combines them through a one-parameter logistic layer
//! `r̂ = σ(α(θ − d))` to predict response correctness, trains on observed
//! correctness, and ships the evaluation analyses (masked AUC/accuracy,
//! per-KC difficulty agreement, learning curves, case studies) plus a
//! synthetic-student simulator that serves as the verification oracle.

pub mod corpus;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod hash;
pub mod irt;
pub mod prompts;
pub mod simulate;
pub mod trainer;

pub use corpus::{
    merge_consecutive_utterances, split_validation, AssessmentLabel, Corpus, Dialogue, Speaker,
    SplitTag, Turn, TurnPair,
};
pub use error::{Error, Result};
pub use estimator::{
    estimate_ability, estimate_dialogue, estimate_difficulty, BackendKind, Capabilities,
    DirectProvider, LogitProvider, LogitScores, MockProvider, ProviderConfig, ResolutionRule,
    TinyByteLm, TinyLmConfig, TokenPair, TrainableLogitProvider, TurnEstimate,
};
pub use irt::{bce_loss, gradients, predict, sigmoid, IRTParams, LossReduction};
pub use prompts::{build_difficulty_prompt, build_knowledge_prompt, PromptKind, PromptText};
