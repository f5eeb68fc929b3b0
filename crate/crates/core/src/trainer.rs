//! Joint fine-tuning of a trainable provider and the IRT sensitivity scalar
//! on observed correctness.
//!
//! The objective is the BCE of `σ(α(θ − d))` against labels, where θ and d
//! come from the provider's two prompts per labeled pair. Gradients flow
//! through the closed-form IRT partials into the provider's own parameter
//! gradients. Optimization is AdamW with decoupled weight decay (α exempt,
//! so a lone scalar is not decayed toward zero), gradient accumulation to an
//! effective batch size, and global-norm clipping. Everything is
//! deterministic given the seed and a deterministic provider.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::estimator::{kc_names_for, TokenPair, TrainableLogitProvider};
use crate::eval::{accuracy, auc, build_prediction_records, mask_first_labels};
use crate::irt::{bce_loss, gradients, predict, IRTParams, LossReduction};
use crate::prompts::{build_difficulty_prompt, build_knowledge_prompt, PromptText};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Hyperparameters. Defaults follow the published training setup: learning
/// rate from the {1e-5, 5e-5, 1e-4, 2e-4} grid, adapter rank from {16, 32},
/// scaling 16, effective batch 64 via accumulation, clipping at 1.0,
/// 5 epochs, AdamW with weight decay 1e-2, sum-reduced loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub adapter_rank: usize,
    pub adapter_scaling: usize,
    pub effective_batch_size: usize,
    /// Accumulation granularity inside one effective batch.
    pub micro_batch_size: usize,
    pub grad_clip_norm: f64,
    pub epochs: usize,
    pub weight_decay: f64,
    pub seed: u64,
    pub loss_reduction: LossReduction,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            adapter_rank: 16,
            adapter_scaling: 16,
            effective_batch_size: 64,
            micro_batch_size: 8,
            grad_clip_norm: 1.0,
            epochs: 5,
            weight_decay: 1e-2,
            seed: 0,
            loss_reduction: LossReduction::Sum,
        }
    }
}

/// The learning rates searched by default.
pub const LEARNING_RATE_GRID: [f64; 4] = [1e-5, 5e-5, 1e-4, 2e-4];
/// The adapter ranks searched by default.
pub const ADAPTER_RANK_GRID: [usize; 2] = [16, 32];

/// The full default grid: every learning rate crossed with every rank.
pub fn default_grid(seed: u64) -> Vec<TrainConfig> {
    let mut grid = Vec::new();
    for &learning_rate in &LEARNING_RATE_GRID {
        for &adapter_rank in &ADAPTER_RANK_GRID {
            grid.push(TrainConfig {
                learning_rate,
                adapter_rank,
                seed,
                ..TrainConfig::default()
            });
        }
    }
    grid
}

// ---------------------------------------------------------------------------
// Training examples
// ---------------------------------------------------------------------------

/// One labeled pair rendered for training.
#[derive(Debug, Clone)]
pub struct TrainingExample {
    pub dialogue_id: String,
    pub pair_index: usize,
    pub knowledge: PromptText,
    pub difficulty: PromptText,
    pub label: bool,
}

/// Exactly one example per labeled pair, in (dialogue, pair) order. First
/// labels are included; only evaluation masks them.
pub fn build_training_examples(corpus: &Corpus) -> Result<Vec<TrainingExample>> {
    let mut examples = Vec::new();
    for dialogue in &corpus.dialogues {
        for pair in dialogue.turn_pairs()? {
            let Some(label) = pair.label else { continue };
            let history = dialogue.history_before_pair(pair.pair_index);
            let kc_names = kc_names_for(&label.kc_ids, &corpus.kc_catalog)?;
            examples.push(TrainingExample {
                dialogue_id: dialogue.dialogue_id.clone(),
                pair_index: pair.pair_index,
                knowledge: build_knowledge_prompt(&dialogue.question_text, history)?,
                difficulty: build_difficulty_prompt(
                    &dialogue.question_text,
                    history,
                    pair.tutor,
                    &kc_names,
                )?,
                label: label.correctness,
            });
        }
    }
    Ok(examples)
}

// ---------------------------------------------------------------------------
// History and checkpoints
// ---------------------------------------------------------------------------

/// Snapshot of everything learnable at the end of an epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub epoch: usize,
    pub label: String,
    pub alpha: f64,
    pub provider_params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_auc: f64,
    pub validation_accuracy: f64,
    /// Largest post-clip global gradient norm seen this epoch.
    pub max_clipped_grad_norm: f64,
    pub checkpoint: Checkpoint,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

/// The checkpoint with the highest validation AUC; ties go to the earliest
/// epoch.
pub fn select_checkpoint(history: &TrainHistory) -> Result<&Checkpoint> {
    history
        .epochs
        .iter()
        .max_by(|a, b| {
            a.validation_auc
                .partial_cmp(&b.validation_auc)
                .expect("finite AUCs")
                // max_by keeps the later element on ties; prefer the earlier
                .then(b.epoch.cmp(&a.epoch))
        })
        .map(|r| &r.checkpoint)
        .ok_or(Error::EmptyHistory)
}

// ---------------------------------------------------------------------------
// AdamW
// ---------------------------------------------------------------------------

struct AdamW {
    m: Vec<f64>,
    v: Vec<f64>,
    t: usize,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
}

impl AdamW {
    fn new(n: usize, lr: f64, weight_decay: f64) -> AdamW {
        AdamW {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
        }
    }

    /// One decoupled-decay step; `decay` masks which parameters decay.
    fn step(&mut self, params: &mut [f64], grads: &[f64], decay: impl Fn(usize) -> bool) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            if decay(i) {
                params[i] -= self.lr * self.weight_decay * params[i];
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Fine-tuning
// ---------------------------------------------------------------------------

/// Optimize provider parameters and α jointly on the training corpus,
/// recording per-epoch validation metrics (masked AUC and accuracy) and a
/// checkpoint per epoch.
pub fn fine_tune(
    train: &Corpus,
    validation: &Corpus,
    provider: &mut dyn TrainableLogitProvider,
    irt: &mut IRTParams,
    cfg: &TrainConfig,
) -> Result<TrainHistory> {
    if !provider.capabilities().trainable {
        return Err(Error::Provider("provider is not trainable".to_string()));
    }
    let examples = build_training_examples(train)?;
    if examples.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let knowledge_tokens = TokenPair::good_bad();
    let difficulty_tokens = TokenPair::hard_easy();
    let n_provider = provider.param_count();
    let mut optimizer = AdamW::new(n_provider + 1, cfg.learning_rate, cfg.weight_decay);
    let mut history = TrainHistory::default();

    let mut order: Vec<usize> = (0..examples.len()).collect();
    for epoch in 1..=cfg.epochs {
        let mut rng = Pcg64::seed_from_u64(cfg.seed.wrapping_add(epoch as u64));
        order.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        let mut epoch_examples = 0usize;
        let mut max_clipped_norm: f64 = 0.0;

        for batch in order.chunks(cfg.effective_batch_size) {
            let mut grads = vec![0.0; n_provider + 1];
            let mut batch_loss = 0.0;
            // Accumulation over micro-batches; sums are order-stable, so
            // micro-batch size never changes the result.
            for micro in batch.chunks(cfg.micro_batch_size.max(1)) {
                for &idx in micro {
                    let example = &examples[idx];
                    let theta = provider
                        .score(&example.knowledge, &knowledge_tokens)?
                        .difference();
                    let d = provider
                        .score(&example.difficulty, &difficulty_tokens)?
                        .difference();
                    let r_hat = predict(theta, d, irt)?;
                    batch_loss += bce_loss(&[r_hat], &[example.label], LossReduction::Sum)?;
                    let g = gradients(theta, d, irt, example.label)?;
                    provider.accumulate_estimate_grad(
                        &example.knowledge,
                        &knowledge_tokens,
                        g.d_theta,
                        &mut grads[..n_provider],
                    )?;
                    provider.accumulate_estimate_grad(
                        &example.difficulty,
                        &difficulty_tokens,
                        g.d_d,
                        &mut grads[..n_provider],
                    )?;
                    grads[n_provider] += g.d_alpha;
                }
            }
            if cfg.loss_reduction == LossReduction::Mean {
                let scale = 1.0 / batch.len() as f64;
                for g in grads.iter_mut() {
                    *g *= scale;
                }
                batch_loss *= scale;
            }
            if !batch_loss.is_finite() {
                let examples_desc = batch
                    .iter()
                    .map(|&i| format!("{}/{}", examples[i].dialogue_id, examples[i].pair_index))
                    .collect::<Vec<_>>()
                    .join(", ");
                return Err(Error::Divergence {
                    examples: examples_desc,
                });
            }
            epoch_loss += batch_loss;
            epoch_examples += batch.len();

            let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > cfg.grad_clip_norm {
                let scale = cfg.grad_clip_norm / norm;
                for g in grads.iter_mut() {
                    *g *= scale;
                }
            }
            max_clipped_norm = max_clipped_norm.max(norm.min(cfg.grad_clip_norm));

            let mut params = provider.params();
            params.push(irt.alpha);
            // α (the last parameter) is exempt from weight decay
            optimizer.step(&mut params, &grads, |i| i < n_provider);
            irt.alpha = params.pop().expect("alpha present");
            provider.set_params(&params)?;
        }

        let train_loss = match cfg.loss_reduction {
            LossReduction::Sum => epoch_loss,
            LossReduction::Mean => epoch_loss / (epoch_examples as f64 / 1.0).max(1.0),
        };

        let records = build_prediction_records(validation, provider_as_frozen(provider), irt)?;
        let masked = mask_first_labels(&records);
        let labels: Vec<bool> = masked.iter().map(|r| r.label).collect();
        let scores: Vec<f64> = masked.iter().map(|r| r.r_hat).collect();
        let validation_auc = auc(&labels, &scores)?;
        let validation_accuracy = accuracy(&labels, &scores, 0.5)?;

        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            validation_auc,
            validation_accuracy,
            max_clipped_grad_norm: max_clipped_norm,
            checkpoint: Checkpoint {
                epoch,
                label: format!("epoch-{epoch}"),
                alpha: irt.alpha,
                provider_params: provider.params(),
            },
        });
    }
    Ok(history)
}

fn provider_as_frozen(
    provider: &mut dyn TrainableLogitProvider,
) -> &dyn crate::estimator::LogitProvider {
    provider
}

/// Restore a checkpoint into the provider and IRT parameters.
pub fn restore_checkpoint(
    checkpoint: &Checkpoint,
    provider: &mut dyn TrainableLogitProvider,
    irt: &mut IRTParams,
) -> Result<()> {
    provider.set_params(&checkpoint.provider_params)?;
    irt.alpha = checkpoint.alpha;
    Ok(())
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellMetrics {
    pub best_validation_auc: f64,
    pub best_epoch: usize,
}

/// One grid cell's outcome; failed runs carry the error text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCell {
    pub learning_rate: f64,
    pub adapter_rank: usize,
    pub outcome: std::result::Result<CellMetrics, String>,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub best_config: TrainConfig,
    pub best_checkpoint: Checkpoint,
    pub best_history: TrainHistory,
    pub table: Vec<GridCell>,
}

/// Run `fine_tune` once per config and select the cell with the best
/// validation AUC. Failed cells stay in the table; if every cell fails, the
/// first failure propagates.
pub fn grid_search(
    train: &Corpus,
    validation: &Corpus,
    grid: &[TrainConfig],
    make_provider: &mut dyn FnMut(&TrainConfig) -> Result<Box<dyn TrainableLogitProvider>>,
) -> Result<GridOutcome> {
    if grid.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let mut table = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, TrainConfig, Checkpoint, TrainHistory)> = None;
    let mut first_error = None;
    for cfg in grid {
        let run = make_provider(cfg).and_then(|mut provider| {
            let mut irt = IRTParams::default();
            fine_tune(train, validation, provider.as_mut(), &mut irt, cfg)
        });
        match run {
            Ok(history) => {
                let checkpoint = select_checkpoint(&history)?.clone();
                let record = &history.epochs[checkpoint.epoch - 1];
                table.push(GridCell {
                    learning_rate: cfg.learning_rate,
                    adapter_rank: cfg.adapter_rank,
                    outcome: Ok(CellMetrics {
                        best_validation_auc: record.validation_auc,
                        best_epoch: checkpoint.epoch,
                    }),
                });
                let is_better = best
                    .as_ref()
                    .map(|(auc, ..)| record.validation_auc > *auc)
                    .unwrap_or(true);
                if is_better {
                    best = Some((record.validation_auc, cfg.clone(), checkpoint, history));
                }
            }
            Err(e) => {
                table.push(GridCell {
                    learning_rate: cfg.learning_rate,
                    adapter_rank: cfg.adapter_rank,
                    outcome: Err(e.to_string()),
                });
                if first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }
    match best {
        Some((_, best_config, best_checkpoint, best_history)) => Ok(GridOutcome {
            best_config,
            best_checkpoint,
            best_history,
            table,
        }),
        None => Err(first_error.expect("all cells failed")),
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AssessmentLabel, Dialogue, Speaker, SplitTag, Turn};
    use crate::estimator::DirectProvider;

    /// Small deterministic corpus: `n` dialogues, alternating labels, one KC.
    fn synthetic_corpus(n: usize, pairs: usize) -> Corpus {
        let mut corpus = Corpus::default();
        corpus
            .kc_catalog
            .insert("kc-1".to_string(), "Skill one".to_string());
        for i in 0..n {
            let id = format!("dlg-{i:03}");
            let mut turns = Vec::new();
            let mut labels = Vec::new();
            for j in 1..=pairs {
                turns.push(Turn {
                    index: turns.len(),
                    speaker: Speaker::Tutor,
                    text: format!("task {j} of {id}"),
                });
                turns.push(Turn {
                    index: turns.len(),
                    speaker: Speaker::Student,
                    text: format!("answer {j} of {id}"),
                });
                labels.push(AssessmentLabel {
                    pair_index: j,
                    kc_ids: vec!["kc-1".to_string()],
                    correctness: (i + j) % 2 == 0,
                });
            }
            corpus.dialogues.push(Dialogue {
                dialogue_id: id,
                question_text: format!("synthetic question {i}"),
                turns,
                labels,
                split_tag: SplitTag::Train,
            });
        }
        corpus
    }

    fn quick_config(lr: f64, epochs: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: lr,
            epochs,
            weight_decay: 0.0,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn example_counts_and_order() {
        let mut corpus = synthetic_corpus(2, 3);
        corpus.dialogues[1].labels.truncate(2);
        let examples = build_training_examples(&corpus).unwrap();
        assert_eq!(examples.len(), 5);
        let keys: Vec<(String, usize)> = examples
            .iter()
            .map(|e| (e.dialogue_id.clone(), e.pair_index))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted, "examples must follow (dialogue, pair) order");

        corpus.dialogues[0].labels.clear();
        let examples = build_training_examples(&corpus).unwrap();
        assert_eq!(examples.len(), 2);
    }

    #[test]
    fn select_checkpoint_argmax_with_tie_break() {
        let mk = |epoch: usize, auc: f64| EpochRecord {
            epoch,
            train_loss: 0.0,
            validation_auc: auc,
            validation_accuracy: 0.0,
            max_clipped_grad_norm: 0.0,
            checkpoint: Checkpoint {
                epoch,
                label: format!("epoch-{epoch}"),
                alpha: 1.0,
                provider_params: vec![],
            },
        };
        let history = TrainHistory {
            epochs: vec![mk(1, 0.6), mk(2, 0.7), mk(3, 0.65)],
        };
        assert_eq!(select_checkpoint(&history).unwrap().epoch, 2);

        let tied = TrainHistory {
            epochs: vec![mk(1, 0.7), mk(2, 0.7)],
        };
        assert_eq!(select_checkpoint(&tied).unwrap().epoch, 1);

        let single = TrainHistory {
            epochs: vec![mk(1, 0.5)],
        };
        assert_eq!(select_checkpoint(&single).unwrap().epoch, 1);

        assert!(matches!(
            select_checkpoint(&TrainHistory::default()),
            Err(Error::EmptyHistory)
        ));
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let corpus = synthetic_corpus(6, 4);
        let mut provider = DirectProvider::for_corpus(&corpus).unwrap();
        let before = provider.params();
        let mut irt = IRTParams::default();
        let history = fine_tune(
            &corpus,
            &corpus,
            &mut provider,
            &mut irt,
            &quick_config(0.0, 3),
        )
        .unwrap();
        assert_eq!(provider.params(), before);
        assert_eq!(irt.alpha, 1.0);
        let losses: Vec<f64> = history.epochs.iter().map(|e| e.train_loss).collect();
        assert!(losses.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12));
    }

    #[test]
    fn training_is_deterministic_given_seed() {
        let corpus = synthetic_corpus(8, 4);
        let cfg = quick_config(0.05, 3);
        let run = || {
            let mut provider = DirectProvider::for_corpus(&corpus).unwrap();
            let mut irt = IRTParams::default();
            fine_tune(&corpus, &corpus, &mut provider, &mut irt, &cfg).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn loss_decreases_on_training_fixture() {
        let corpus = synthetic_corpus(10, 4);
        let mut provider = DirectProvider::for_corpus(&corpus).unwrap();
        let mut irt = IRTParams::default();
        let history = fine_tune(
            &corpus,
            &corpus,
            &mut provider,
            &mut irt,
            &quick_config(0.05, 3),
        )
        .unwrap();
        let losses: Vec<f64> = history.epochs.iter().map(|e| e.train_loss).collect();
        assert!(
            losses.windows(2).all(|w| w[1] < w[0]),
            "loss must strictly decrease: {losses:?}"
        );
    }

    #[test]
    fn accumulation_granularity_does_not_change_updates() {
        let corpus = synthetic_corpus(6, 4);
        let run = |micro: usize| {
            let mut provider = DirectProvider::for_corpus(&corpus).unwrap();
            let mut irt = IRTParams::default();
            let cfg = TrainConfig {
                micro_batch_size: micro,
                ..quick_config(0.05, 2)
            };
            fine_tune(&corpus, &corpus, &mut provider, &mut irt, &cfg).unwrap();
            (provider.params(), irt.alpha)
        };
        let (p8, a8) = run(8);
        let (p64, a64) = run(64);
        assert_eq!(p8.len(), p64.len());
        for (x, y) in p8.iter().zip(&p64) {
            assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
        }
        assert!((a8 - a64).abs() <= 1e-6);
    }

    #[test]
    fn clipped_gradient_norms_stay_under_the_limit() {
        let corpus = synthetic_corpus(10, 4);
        let mut provider = DirectProvider::for_corpus(&corpus).unwrap();
        let mut irt = IRTParams::default();
        let cfg = quick_config(0.05, 2);
        let history = fine_tune(&corpus, &corpus, &mut provider, &mut irt, &cfg).unwrap();
        for record in &history.epochs {
            assert!(record.max_clipped_grad_norm <= cfg.grad_clip_norm + 1e-12);
        }
    }

    #[test]
    fn divergence_is_reported_with_examples() {
        let corpus = synthetic_corpus(4, 3);
        let mut provider = DirectProvider::for_corpus(&corpus).unwrap();
        let poisoned = vec![f64::NAN; provider.param_count()];
        provider.set_params(&poisoned).unwrap();
        let mut irt = IRTParams::default();
        match fine_tune(
            &corpus,
            &corpus,
            &mut provider,
            &mut irt,
            &quick_config(0.05, 1),
        ) {
            Err(Error::NumericDomain(_)) | Err(Error::Divergence { .. }) => {}
            other => panic!("expected divergence-path error, got {other:?}"),
        }
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let corpus = Corpus::default();
        let mut provider = DirectProvider::for_corpus(&corpus).unwrap();
        let mut irt = IRTParams::default();
        assert!(matches!(
            fine_tune(
                &corpus,
                &corpus,
                &mut provider,
                &mut irt,
                &quick_config(0.05, 1)
            ),
            Err(Error::EmptyHistory)
        ));
    }

    #[test]
    fn grid_search_selects_the_dominating_config() {
        let corpus = synthetic_corpus(10, 4);
        let grid = vec![quick_config(0.0, 2), quick_config(0.08, 2)];
        let mut factory = |_: &TrainConfig| -> Result<Box<dyn TrainableLogitProvider>> {
            Ok(Box::new(DirectProvider::for_corpus(&corpus)?))
        };
        let outcome = grid_search(&corpus, &corpus, &grid, &mut factory).unwrap();
        assert_eq!(outcome.table.len(), 2);
        // the trained cell must dominate the frozen one on training data
        assert_eq!(outcome.best_config.learning_rate, 0.08);
        assert!(outcome.table.iter().all(|c| c.outcome.is_ok()));
    }

    #[test]
    fn grid_search_single_cell_returns_it() {
        let corpus = synthetic_corpus(6, 3);
        let grid = vec![quick_config(0.05, 1)];
        let mut factory = |_: &TrainConfig| -> Result<Box<dyn TrainableLogitProvider>> {
            Ok(Box::new(DirectProvider::for_corpus(&corpus)?))
        };
        let outcome = grid_search(&corpus, &corpus, &grid, &mut factory).unwrap();
        assert_eq!(outcome.best_config.learning_rate, 0.05);
    }

    #[test]
    fn grid_search_marks_failed_cells_but_still_selects() {
        let corpus = synthetic_corpus(8, 4);
        let grid = vec![quick_config(0.05, 1), quick_config(0.02, 1)];
        let mut calls = 0;
        let mut factory = |_: &TrainConfig| -> Result<Box<dyn TrainableLogitProvider>> {
            calls += 1;
            let mut provider = DirectProvider::for_corpus(&corpus)?;
            if calls == 1 {
                // first cell diverges
                let poisoned = vec![f64::NAN; provider.param_count()];
                provider.set_params(&poisoned)?;
            }
            Ok(Box::new(provider))
        };
        let outcome = grid_search(&corpus, &corpus, &grid, &mut factory).unwrap();
        assert_eq!(outcome.best_config.learning_rate, 0.02);
        assert_eq!(outcome.table.len(), 2);
        assert!(
            outcome.table[0].outcome.is_err(),
            "failed cell must stay in the table"
        );
        assert!(outcome.table[1].outcome.is_ok());
    }

    #[test]
    fn grid_search_surfaces_total_failure() {
        let corpus = synthetic_corpus(4, 3);
        let grid = vec![quick_config(0.05, 1), quick_config(0.01, 1)];
        let mut factory = |_: &TrainConfig| -> Result<Box<dyn TrainableLogitProvider>> {
            let mut provider = DirectProvider::for_corpus(&corpus)?;
            let poisoned = vec![f64::NAN; provider.param_count()];
            provider.set_params(&poisoned)?;
            Ok(Box::new(provider))
        };
        assert!(grid_search(&corpus, &corpus, &grid, &mut factory).is_err());
    }

    #[test]
    fn default_grid_covers_the_search_space() {
        let grid = default_grid(3);
        assert_eq!(grid.len(), 8);
        assert!(grid
            .iter()
            .all(|c| LEARNING_RATE_GRID.contains(&c.learning_rate)));
        assert!(grid
            .iter()
            .all(|c| ADAPTER_RANK_GRID.contains(&c.adapter_rank)));
        assert!(grid.iter().all(|c| c.adapter_scaling == 16));
        assert!(grid.iter().all(|c| c.seed == 3));
    }
}
