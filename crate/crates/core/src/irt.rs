//! 1PL prediction layer: `r̂ = σ(α(θ − d))`, the binary cross-entropy
//! objective, and its closed-form gradients.
//!
//! Only the ability–difficulty gap is identifiable: shifting both inputs by
//! the same constant leaves every prediction unchanged, and scaling the
//! inputs by `k > 0` is equivalent to scaling `α` by `k`. Downstream code
//! (parameter recovery in particular) relies on these identities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Clamp applied to predictions before taking logs.
pub const PREDICTION_EPSILON: f64 = 1e-7;

/// The learnable sensitivity scalar. Sign is unconstrained; 1.0 recovers the
/// plain Rasch model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IRTParams {
    pub alpha: f64,
    pub alpha_init: f64,
}

impl Default for IRTParams {
    fn default() -> Self {
        IRTParams {
            alpha: 1.0,
            alpha_init: 1.0,
        }
    }
}

impl IRTParams {
    pub fn with_alpha(alpha: f64) -> Self {
        IRTParams {
            alpha,
            alpha_init: alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossReduction {
    /// Matches the displayed objective: a plain sum over examples.
    #[default]
    Sum,
    Mean,
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Probability that the student answers the next tutor-posed task correctly.
pub fn predict(theta: f64, d: f64, params: &IRTParams) -> Result<f64> {
    if !theta.is_finite() || !d.is_finite() || !params.alpha.is_finite() {
        return Err(Error::NumericDomain(format!(
            "predict inputs must be finite (theta={theta}, d={d}, alpha={})",
            params.alpha
        )));
    }
    Ok(sigmoid(params.alpha * (theta - d)))
}

/// Binary cross-entropy between predictions and 0/1 labels.
///
/// Predictions are clamped to `[ε, 1 − ε]` before the log so saturated
/// probabilities cannot produce infinities.
pub fn bce_loss(predictions: &[f64], labels: &[bool], reduction: LossReduction) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::ShapeMismatch("bce_loss on empty input".to_string()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut total = 0.0;
    for (&p, &label) in predictions.iter().zip(labels) {
        if !p.is_finite() {
            return Err(Error::NumericDomain(format!("non-finite prediction {p}")));
        }
        let p = p.clamp(PREDICTION_EPSILON, 1.0 - PREDICTION_EPSILON);
        let r = f64::from(u8::from(label));
        total -= r * p.ln() + (1.0 - r) * (1.0 - p).ln();
    }
    Ok(match reduction {
        LossReduction::Sum => total,
        LossReduction::Mean => total / predictions.len() as f64,
    })
}

/// Partials of the per-example BCE with respect to θ, d, and α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gradients {
    pub d_theta: f64,
    pub d_d: f64,
    pub d_alpha: f64,
}

/// Closed-form gradient of the per-example loss:
/// `∂ℒ/∂θ = α(r̂ − r)`, `∂ℒ/∂d = −α(r̂ − r)`, `∂ℒ/∂α = (θ − d)(r̂ − r)`.
pub fn gradients(theta: f64, d: f64, params: &IRTParams, label: bool) -> Result<Gradients> {
    let r_hat = predict(theta, d, params)?;
    let residual = r_hat - f64::from(u8::from(label));
    Ok(Gradients {
        d_theta: params.alpha * residual,
        d_d: -params.alpha * residual,
        d_alpha: (theta - d) * residual,
    })
}
