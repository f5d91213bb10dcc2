//! Binary logistic regression trained by full-batch gradient descent on the
//! mean negative log-likelihood, with optional L2 on the weights.

use serde::{Deserialize, Serialize};

use super::{validate_training_input, ModelError};

/// Gradient-descent settings. The defaults are deterministic and converge on
/// desk-scale standardized data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, max_iters: 5000, tolerance: 1e-6, l2: 0.0 }
    }
}

/// Fitted model: intercept, one weight per feature, and training metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub final_loss: f64,
}

/// Numerically stable sigmoid, clamped to the open interval (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

impl LogisticModel {
    fn linear(&self, features: &[f64]) -> Result<f64, ModelError> {
        if features.len() != self.weights.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.weights.len(),
                got: features.len(),
            });
        }
        let dot: f64 = self.weights.iter().zip(features).map(|(w, x)| w * x).sum();
        Ok(self.intercept + dot)
    }

    /// P(flood) = sigmoid(intercept + weights . x).
    pub fn predict_proba(&self, features: &[f64]) -> Result<f64, ModelError> {
        Ok(sigmoid(self.linear(features)?))
    }

    /// Class 1 iff the probability reaches the threshold.
    pub fn predict(&self, features: &[f64], threshold: f64) -> Result<u8, ModelError> {
        Ok(u8::from(self.predict_proba(features)? >= threshold))
    }
}

/// Mean negative log-likelihood plus `l2/2 * ||weights||^2`, with its
/// analytic gradient (intercept part, then per-weight parts).
///
/// The loss uses the log-sum-exp form, so it stays finite for large margins.
pub fn log_loss_and_gradient(
    features: &[Vec<f64>],
    labels: &[u8],
    intercept: f64,
    weights: &[f64],
    l2: f64,
) -> (f64, f64, Vec<f64>) {
    let n = features.len() as f64;
    let mut loss = 0.0;
    let mut grad_intercept = 0.0;
    let mut grad_weights = vec![0.0; weights.len()];
    for (row, &y) in features.iter().zip(labels) {
        let z = intercept + weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>();
        // ln(1 + e^z) - y z, computed as max(z, 0) + ln(1 + e^-|z|) - y z
        loss += z.max(0.0) + (-z.abs()).exp().ln_1p() - f64::from(y) * z;
        let residual = sigmoid(z) - f64::from(y);
        grad_intercept += residual;
        for (g, x) in grad_weights.iter_mut().zip(row) {
            *g += residual * x;
        }
    }
    loss /= n;
    grad_intercept /= n;
    for (g, w) in grad_weights.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_intercept, grad_weights)
}

/// Fit by gradient descent from zero parameters. Stops when the gradient
/// infinity-norm drops below the tolerance or the iteration budget runs out.
pub fn fit_logistic(
    features: &[Vec<f64>],
    labels: &[u8],
    config: &LogisticConfig,
) -> Result<LogisticModel, ModelError> {
    let (model, _) = fit_logistic_traced(features, labels, config)?;
    Ok(model)
}

/// Same as [`fit_logistic`] but also returns the loss recorded at every
/// iteration, for convergence diagnostics.
pub fn fit_logistic_traced(
    features: &[Vec<f64>],
    labels: &[u8],
    config: &LogisticConfig,
) -> Result<(LogisticModel, Vec<f64>), ModelError> {
    let columns = validate_training_input(features, labels)?;
    if config.learning_rate <= 0.0 {
        return Err(ModelError::InvalidHyperparameter(format!(
            "learning rate {} must be positive",
            config.learning_rate
        )));
    }
    if config.l2 < 0.0 {
        return Err(ModelError::InvalidHyperparameter(format!(
            "l2 strength {} must be non-negative",
            config.l2
        )));
    }

    let mut intercept = 0.0;
    let mut weights = vec![0.0; columns];
    let mut losses = Vec::with_capacity(config.max_iters);
    let mut final_loss = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..config.max_iters {
        let (loss, grad_intercept, grad_weights) =
            log_loss_and_gradient(features, labels, intercept, &weights, config.l2);
        losses.push(loss);
        final_loss = loss;
        let grad_norm = grad_weights
            .iter()
            .fold(grad_intercept.abs(), |acc, g| acc.max(g.abs()));
        if grad_norm < config.tolerance {
            break;
        }
        intercept -= config.learning_rate * grad_intercept;
        for (w, g) in weights.iter_mut().zip(&grad_weights) {
            *w -= config.learning_rate * g;
        }
        iterations += 1;
    }
    if final_loss.is_infinite() {
        // max_iters == 0: report the loss at the zero-initialized parameters
        let (loss, _, _) = log_loss_and_gradient(features, labels, intercept, &weights, config.l2);
        final_loss = loss;
    }
    Ok((LogisticModel { intercept, weights, iterations, final_loss }, losses))
}
