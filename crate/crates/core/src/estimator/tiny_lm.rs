//! A self-contained byte-level causal transformer provider.
//!
//! This is the `lm` backend at desk scale: a small causal language model
//! whose frozen base weights come from a weights file (or, absent one, a
//! seeded initialization), with low-rank adapters on the attention query and
//! value projections as the only trainable parameters. Scoring reads the
//! next-token logits at the final prompt position; nothing is sampled.
//!
//! Adapter gradients are computed by central finite differences, which is
//! exact enough (step 1e-4 on f64) and affordable for the adapter counts
//! used in the smoke tests. It is not meant for full-scale fine-tuning; use
//! a GPU runtime for that.

use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prompts::{truncate_to_budget, PromptText};

use super::{
    Capabilities, LogitProvider, LogitScores, ResolutionRule, TokenPair, TrainableLogitProvider,
};

const VOCAB: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TinyLmConfig {
    pub dim: usize,
    pub layers: usize,
    pub hidden: usize,
    /// Context budget in bytes; prompt histories are truncated to fit.
    pub max_context_bytes: usize,
    pub adapter_rank: usize,
    pub adapter_scaling: usize,
    pub seed: u64,
}

impl Default for TinyLmConfig {
    fn default() -> Self {
        TinyLmConfig {
            dim: 16,
            layers: 2,
            hidden: 32,
            max_context_bytes: 2048,
            adapter_rank: 2,
            adapter_scaling: 16,
            seed: 17,
        }
    }
}

/// Frozen base weights, row-major `[rows][cols]` flattened.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BaseWeights {
    tok_emb: Vec<f64>, // VOCAB x dim
    wq: Vec<Vec<f64>>, // per layer, dim x dim
    wk: Vec<Vec<f64>>,
    wv: Vec<Vec<f64>>,
    wo: Vec<Vec<f64>>,
    w1: Vec<Vec<f64>>, // per layer, dim x hidden
    w2: Vec<Vec<f64>>, // per layer, hidden x dim
    unemb: Vec<f64>,   // dim x VOCAB
}

/// Where each adapter matrix lives inside the flat parameter vector.
#[derive(Debug, Clone, Copy)]
struct AdapterSpan {
    down: (usize, usize), // offset, len (dim * rank)
    up: (usize, usize),   // offset, len (rank * dim)
}

#[derive(Debug)]
pub struct TinyByteLm {
    cfg: TinyLmConfig,
    base: BaseWeights,
    /// Flattened adapters: per layer, q.down, q.up, v.down, v.up.
    adapters: Vec<f64>,
    q_spans: Vec<AdapterSpan>,
    v_spans: Vec<AdapterSpan>,
    warned_fallback: AtomicBool,
}

impl Clone for TinyByteLm {
    fn clone(&self) -> Self {
        TinyByteLm {
            cfg: self.cfg,
            base: self.base.clone(),
            adapters: self.adapters.clone(),
            q_spans: self.q_spans.clone(),
            v_spans: self.v_spans.clone(),
            warned_fallback: AtomicBool::new(self.warned_fallback.load(Ordering::Relaxed)),
        }
    }
}

fn seeded_matrix(rng: &mut Pcg64, rows: usize, cols: usize, scale: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, scale).expect("valid stddev");
    (0..rows * cols).map(|_| normal.sample(rng)).collect()
}

impl TinyByteLm {
    /// Build a model with deterministic seeded base weights and neutral
    /// adapters (the up-projection starts at zero, so adapters contribute
    /// nothing until trained).
    pub fn new(cfg: TinyLmConfig) -> TinyByteLm {
        let mut rng = Pcg64::seed_from_u64(cfg.seed);
        let d = cfg.dim;
        let scale = 1.0 / (d as f64).sqrt();
        let mut base = BaseWeights {
            tok_emb: seeded_matrix(&mut rng, VOCAB, d, scale),
            wq: Vec::new(),
            wk: Vec::new(),
            wv: Vec::new(),
            wo: Vec::new(),
            w1: Vec::new(),
            w2: Vec::new(),
            unemb: seeded_matrix(&mut rng, d, VOCAB, scale),
        };
        for _ in 0..cfg.layers {
            base.wq.push(seeded_matrix(&mut rng, d, d, scale));
            base.wk.push(seeded_matrix(&mut rng, d, d, scale));
            base.wv.push(seeded_matrix(&mut rng, d, d, scale));
            base.wo.push(seeded_matrix(&mut rng, d, d, scale));
            base.w1.push(seeded_matrix(&mut rng, d, cfg.hidden, scale));
            base.w2.push(seeded_matrix(&mut rng, cfg.hidden, d, scale));
        }
        Self::assemble(cfg, base, &mut rng)
    }

    fn assemble(cfg: TinyLmConfig, base: BaseWeights, rng: &mut Pcg64) -> TinyByteLm {
        let d = cfg.dim;
        let r = cfg.adapter_rank;
        let mut adapters = Vec::new();
        let mut q_spans = Vec::new();
        let mut v_spans = Vec::new();
        let push_adapter = |adapters: &mut Vec<f64>, rng: &mut Pcg64| -> AdapterSpan {
            let down_off = adapters.len();
            adapters.extend(seeded_matrix(rng, d, r, 0.1 / (d as f64).sqrt()));
            let up_off = adapters.len();
            adapters.extend(std::iter::repeat_n(0.0, r * d));
            AdapterSpan {
                down: (down_off, d * r),
                up: (up_off, r * d),
            }
        };
        for _ in 0..cfg.layers {
            q_spans.push(push_adapter(&mut adapters, rng));
            v_spans.push(push_adapter(&mut adapters, rng));
        }
        TinyByteLm {
            cfg,
            base,
            adapters,
            q_spans,
            v_spans,
            warned_fallback: AtomicBool::new(false),
        }
    }

    pub fn config(&self) -> &TinyLmConfig {
        &self.cfg
    }

    /// Persist the frozen base weights.
    pub fn save_weights(&self, path: &Path) -> Result<()> {
        let file = WeightsFile {
            dim: self.cfg.dim,
            layers: self.cfg.layers,
            hidden: self.cfg.hidden,
            base: self.base.clone(),
        };
        let text = serde_json::to_string(&file)
            .map_err(|e| Error::Provider(format!("serialize weights: {e}")))?;
        std::fs::write(path, text)
            .map_err(|e| Error::Provider(format!("write {}: {e}", path.display())))
    }

    /// Load base weights from a file; adapters start neutral.
    pub fn from_weights_file(path: &Path, cfg: TinyLmConfig) -> Result<TinyByteLm> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Provider(format!("read {}: {e}", path.display())))?;
        let file: WeightsFile = serde_json::from_str(&text)
            .map_err(|e| Error::Provider(format!("weights {}: {e}", path.display())))?;
        if file.dim != cfg.dim || file.layers != cfg.layers || file.hidden != cfg.hidden {
            return Err(Error::Provider(format!(
                "weights shape ({}, {}, {}) does not match config ({}, {}, {})",
                file.dim, file.layers, file.hidden, cfg.dim, cfg.layers, cfg.hidden
            )));
        }
        let mut rng = Pcg64::seed_from_u64(cfg.seed);
        Ok(Self::assemble(cfg, file.base, &mut rng))
    }

    /// Resolve a token to a byte id under the pair's resolution rule. The
    /// byte vocabulary has no multi-byte tokens, so `ExactSingleToken` falls
    /// back to the first byte with a one-time warning.
    fn resolve(&self, token: &str, rule: ResolutionRule) -> Result<usize> {
        let bytes = token.as_bytes();
        if bytes.is_empty() {
            return Err(Error::TokenResolution {
                token: token.to_string(),
            });
        }
        match rule {
            ResolutionRule::FirstSubtoken => Ok(bytes[0] as usize),
            ResolutionRule::ExactSingleToken => {
                let spaced = format!(" {token}");
                if spaced.len() == 1 {
                    Ok(spaced.as_bytes()[0] as usize)
                } else if bytes.len() == 1 {
                    Ok(bytes[0] as usize)
                } else {
                    if !self.warned_fallback.swap(true, Ordering::Relaxed) {
                        eprintln!(
                            "warning: token `{token}` is not a single byte token; \
                             falling back to its first sub-token"
                        );
                    }
                    Ok(bytes[0] as usize)
                }
            }
        }
    }

    fn resolve_pair(&self, tokens: &TokenPair) -> Result<(usize, usize)> {
        let pos = self.resolve(&tokens.positive_token, tokens.resolution_rule)?;
        let neg = self.resolve(&tokens.negative_token, tokens.resolution_rule)?;
        if pos == neg {
            return Err(Error::TokenResolution {
                token: format!(
                    "{} / {} resolve to the same id",
                    tokens.positive_token, tokens.negative_token
                ),
            });
        }
        Ok((pos, neg))
    }

    fn context_bytes(&self, prompt: &PromptText) -> Result<Vec<u8>> {
        let trimmed = truncate_to_budget(prompt, self.cfg.max_context_bytes);
        if trimmed.text.len() > self.cfg.max_context_bytes {
            return Err(Error::Provider(format!(
                "prompt is {} bytes after history truncation; context limit is {}",
                trimmed.text.len(),
                self.cfg.max_context_bytes
            )));
        }
        Ok(trimmed.text.into_bytes())
    }

    fn estimate_with_adapters(
        &self,
        bytes: &[u8],
        adapters: &[f64],
        pos_id: usize,
        neg_id: usize,
    ) -> f64 {
        let logits = self.forward(bytes, adapters);
        logits[pos_id] - logits[neg_id]
    }

    /// Full forward pass; returns the 256 next-token logits at the final
    /// position.
    fn forward(&self, bytes: &[u8], adapters: &[f64]) -> Vec<f64> {
        let d = self.cfg.dim;
        let n = bytes.len().max(1);
        let lora_scale = self.cfg.adapter_scaling as f64 / self.cfg.adapter_rank as f64;

        // Token embedding + sinusoidal positions.
        let mut x = vec![0.0f64; n * d];
        for (t, &b) in bytes.iter().enumerate() {
            let emb = &self.base.tok_emb[b as usize * d..(b as usize + 1) * d];
            for (j, &e) in emb.iter().enumerate() {
                let angle = t as f64 / 10_000f64.powf(2.0 * (j / 2) as f64 / d as f64);
                let pos = if j % 2 == 0 { angle.sin() } else { angle.cos() };
                x[t * d + j] = e + 0.1 * pos;
            }
        }

        let mut q = vec![0.0f64; n * d];
        let mut k = vec![0.0f64; n * d];
        let mut v = vec![0.0f64; n * d];
        let mut normed = vec![0.0f64; n * d];
        for layer in 0..self.cfg.layers {
            rmsnorm_rows(&x, &mut normed, n, d);
            matmul_rows(&normed, &self.base.wq[layer], &mut q, n, d, d);
            matmul_rows(&normed, &self.base.wk[layer], &mut k, n, d, d);
            matmul_rows(&normed, &self.base.wv[layer], &mut v, n, d, d);
            apply_lora(
                &normed,
                adapters,
                &self.q_spans[layer],
                lora_scale,
                &mut q,
                n,
                d,
                self.cfg.adapter_rank,
            );
            apply_lora(
                &normed,
                adapters,
                &self.v_spans[layer],
                lora_scale,
                &mut v,
                n,
                d,
                self.cfg.adapter_rank,
            );

            // Causal single-head attention.
            let inv_sqrt_d = 1.0 / (d as f64).sqrt();
            let mut ctx = vec![0.0f64; n * d];
            let mut weights = vec![0.0f64; n];
            for t in 0..n {
                let qt = &q[t * d..(t + 1) * d];
                let mut max_w = f64::NEG_INFINITY;
                for (s, w) in weights.iter_mut().enumerate().take(t + 1) {
                    let ks = &k[s * d..(s + 1) * d];
                    *w = dot(qt, ks) * inv_sqrt_d;
                    max_w = max_w.max(*w);
                }
                let mut total = 0.0;
                for w in weights.iter_mut().take(t + 1) {
                    *w = (*w - max_w).exp();
                    total += *w;
                }
                for (s, w) in weights.iter().enumerate().take(t + 1) {
                    let vs = &v[s * d..(s + 1) * d];
                    let coef = w / total;
                    for j in 0..d {
                        ctx[t * d + j] += coef * vs[j];
                    }
                }
            }
            let mut attn_out = vec![0.0f64; n * d];
            matmul_rows(&ctx, &self.base.wo[layer], &mut attn_out, n, d, d);
            for i in 0..n * d {
                x[i] += attn_out[i];
            }

            // MLP with SiLU.
            rmsnorm_rows(&x, &mut normed, n, d);
            let h = self.cfg.hidden;
            let mut hidden = vec![0.0f64; n * h];
            matmul_rows(&normed, &self.base.w1[layer], &mut hidden, n, d, h);
            for value in hidden.iter_mut() {
                let s = 1.0 / (1.0 + (-*value).exp());
                *value *= s;
            }
            let mut mlp_out = vec![0.0f64; n * d];
            matmul_rows(&hidden, &self.base.w2[layer], &mut mlp_out, n, h, d);
            for i in 0..n * d {
                x[i] += mlp_out[i];
            }
        }

        let last = &x[(n - 1) * d..n * d];
        let mut final_norm = vec![0.0f64; d];
        rmsnorm_rows(last, &mut final_norm, 1, d);
        let mut logits = vec![0.0f64; VOCAB];
        matmul_rows(&final_norm, &self.base.unemb, &mut logits, 1, d, VOCAB);
        logits
    }
}

impl LogitProvider for TinyByteLm {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            trainable: true,
            batchable: false,
        }
    }

    fn score(&self, prompt: &PromptText, tokens: &TokenPair) -> Result<LogitScores> {
        let (pos_id, neg_id) = self.resolve_pair(tokens)?;
        let bytes = self.context_bytes(prompt)?;
        let logits = self.forward(&bytes, &self.adapters);
        let scores = LogitScores {
            z_positive: logits[pos_id],
            z_negative: logits[neg_id],
        };
        if !scores.z_positive.is_finite() || !scores.z_negative.is_finite() {
            return Err(Error::Provider("non-finite logits".to_string()));
        }
        Ok(scores)
    }
}

impl TrainableLogitProvider for TinyByteLm {
    fn param_count(&self) -> usize {
        self.adapters.len()
    }

    fn params(&self) -> Vec<f64> {
        self.adapters.clone()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.adapters.len() {
            return Err(Error::ShapeMismatch(format!(
                "adapter count {} vs {}",
                self.adapters.len(),
                params.len()
            )));
        }
        self.adapters.copy_from_slice(params);
        Ok(())
    }

    fn accumulate_estimate_grad(
        &self,
        prompt: &PromptText,
        tokens: &TokenPair,
        upstream: f64,
        grads: &mut [f64],
    ) -> Result<()> {
        let (pos_id, neg_id) = self.resolve_pair(tokens)?;
        let bytes = self.context_bytes(prompt)?;
        let step = 1e-4;
        let mut scratch = self.adapters.clone();
        for i in 0..scratch.len() {
            let orig = scratch[i];
            scratch[i] = orig + step;
            let up = self.estimate_with_adapters(&bytes, &scratch, pos_id, neg_id);
            scratch[i] = orig - step;
            let dn = self.estimate_with_adapters(&bytes, &scratch, pos_id, neg_id);
            scratch[i] = orig;
            grads[i] += upstream * (up - dn) / (2.0 * step);
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct WeightsFile {
    dim: usize,
    layers: usize,
    hidden: usize,
    base: BaseWeights,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out[n x cols] = rows[n x inner] · w[inner x cols]`
fn matmul_rows(rows: &[f64], w: &[f64], out: &mut [f64], n: usize, inner: usize, cols: usize) {
    for t in 0..n {
        let row = &rows[t * inner..(t + 1) * inner];
        let dst = &mut out[t * cols..(t + 1) * cols];
        dst.fill(0.0);
        for (i, &r) in row.iter().enumerate() {
            let wrow = &w[i * cols..(i + 1) * cols];
            for (j, &wv) in wrow.iter().enumerate() {
                dst[j] += r * wv;
            }
        }
    }
}

fn rmsnorm_rows(x: &[f64], out: &mut [f64], n: usize, d: usize) {
    for t in 0..n {
        let row = &x[t * d..(t + 1) * d];
        let ms = row.iter().map(|v| v * v).sum::<f64>() / d as f64;
        let inv = 1.0 / (ms + 1e-8).sqrt();
        for j in 0..d {
            out[t * d + j] = row[j] * inv;
        }
    }
}

/// `dst += (x · down) · up * scale`
#[allow(clippy::too_many_arguments)]
fn apply_lora(
    x: &[f64],
    adapters: &[f64],
    span: &AdapterSpan,
    scale: f64,
    dst: &mut [f64],
    n: usize,
    d: usize,
    rank: usize,
) {
    let down = &adapters[span.down.0..span.down.0 + span.down.1];
    let up = &adapters[span.up.0..span.up.0 + span.up.1];
    for t in 0..n {
        let row = &x[t * d..(t + 1) * d];
        for r in 0..rank {
            let mut proj = 0.0;
            for (i, &xv) in row.iter().enumerate() {
                proj += xv * down[i * rank + r];
            }
            let proj = proj * scale;
            let up_row = &up[r * d..(r + 1) * d];
            for j in 0..d {
                dst[t * d + j] += proj * up_row[j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::build_knowledge_prompt;

    fn smoke_prompt() -> PromptText {
        build_knowledge_prompt("What is 2+2?", &[]).unwrap()
    }

    #[test]
    fn scoring_is_finite_and_deterministic() {
        let lm = TinyByteLm::new(TinyLmConfig::default());
        let prompt = smoke_prompt();
        let a = lm.score(&prompt, &TokenPair::good_bad()).unwrap();
        let b = lm.score(&prompt, &TokenPair::good_bad()).unwrap();
        assert!(a.z_positive.is_finite() && a.z_negative.is_finite());
        assert_eq!(a, b);
    }

    #[test]
    fn different_prompts_score_differently() {
        let lm = TinyByteLm::new(TinyLmConfig::default());
        let p1 = build_knowledge_prompt("What is 2+2?", &[]).unwrap();
        let p2 = build_knowledge_prompt("What is 9*9?", &[]).unwrap();
        let a = lm.score(&p1, &TokenPair::good_bad()).unwrap();
        let b = lm.score(&p2, &TokenPair::good_bad()).unwrap();
        assert_ne!(a.difference(), b.difference());
    }

    #[test]
    fn multi_byte_token_falls_back_to_first_subtoken() {
        let lm = TinyByteLm::new(TinyLmConfig::default());
        let prompt = smoke_prompt();
        // GOOD/BAD resolve to G/B under the fallback
        let exact = lm.score(&prompt, &TokenPair::good_bad()).unwrap();
        let first = lm
            .score(
                &prompt,
                &TokenPair::new("G", "B", ResolutionRule::FirstSubtoken).unwrap(),
            )
            .unwrap();
        assert_eq!(exact, first);
    }

    #[test]
    fn ambiguous_pair_is_rejected() {
        let lm = TinyByteLm::new(TinyLmConfig::default());
        let prompt = smoke_prompt();
        let pair = TokenPair::new("HARD", "HAPPY", ResolutionRule::ExactSingleToken).unwrap();
        assert!(matches!(
            lm.score(&prompt, &pair),
            Err(Error::TokenResolution { .. })
        ));
    }

    #[test]
    fn weights_round_trip_preserves_scores() {
        let lm = TinyByteLm::new(TinyLmConfig::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.json");
        lm.save_weights(&path).unwrap();
        let loaded = TinyByteLm::from_weights_file(&path, TinyLmConfig::default()).unwrap();
        let prompt = smoke_prompt();
        let a = lm.score(&prompt, &TokenPair::good_bad()).unwrap();
        let b = loaded.score(&prompt, &TokenPair::good_bad()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finite_difference_gradient_moves_the_estimate() {
        let cfg = TinyLmConfig {
            dim: 8,
            layers: 1,
            hidden: 16,
            adapter_rank: 1,
            ..TinyLmConfig::default()
        };
        let mut lm = TinyByteLm::new(cfg);
        let prompt = smoke_prompt();
        let tokens = TokenPair::good_bad();
        let before = lm.score(&prompt, &tokens).unwrap().difference();

        // one gradient-ascent step on the estimate itself
        let mut grads = vec![0.0; lm.param_count()];
        lm.accumulate_estimate_grad(&prompt, &tokens, 1.0, &mut grads)
            .unwrap();
        assert!(
            grads.iter().any(|&g| g != 0.0),
            "gradient is identically zero"
        );
        let params: Vec<f64> = lm
            .params()
            .iter()
            .zip(&grads)
            .map(|(p, g)| p + 0.05 * g)
            .collect();
        lm.set_params(&params).unwrap();
        let after = lm.score(&prompt, &tokens).unwrap().difference();
        assert!(
            after > before,
            "estimate should increase along its gradient: {before} -> {after}"
        );
    }

    #[test]
    fn long_history_is_truncated_to_context() {
        use crate::corpus::{Speaker, Turn};
        let cfg = TinyLmConfig {
            max_context_bytes: 700,
            ..TinyLmConfig::default()
        };
        let lm = TinyByteLm::new(cfg);
        let history: Vec<Turn> = (0..40)
            .map(|i| Turn {
                index: i,
                speaker: if i % 2 == 0 {
                    Speaker::Tutor
                } else {
                    Speaker::Student
                },
                text: format!("padding turn {i} with plenty of text in it"),
            })
            .collect();
        let prompt = build_knowledge_prompt("the question", &history).unwrap();
        assert!(prompt.text.len() > 700);
        let scores = lm.score(&prompt, &TokenPair::good_bad()).unwrap();
        assert!(scores.z_positive.is_finite());
    }
}
