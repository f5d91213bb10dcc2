//! Soft-margin support vector classifier trained by sequential minimal
//! optimization on the dual problem.
//!
//! Labels are mapped {0, 1} -> {-1, +1} for training and mapped back at
//! prediction. The decision function is `sum_i y_i a_i K(x_i, x) + b` over
//! the retained support vectors, with class 1 iff the value is >= 0.
//!
//! The pair-selection heuristic is deterministic: the first multiplier comes
//! from a sweep over KKT violators, the second prefers the largest error gap
//! and then falls back to index order, so identical inputs always produce
//! identical models.

use serde::{Deserialize, Serialize};

use super::{validate_training_input, ModelError};

/// Kernel choice at configuration time. `gamma: None` resolves to
/// `1 / (n_features * variance_of_all_feature_values)` at fit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: Option<f64> },
}

/// Kernel with all parameters resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

/// Evaluate the kernel: dot product, or `exp(-gamma * ||x - y||^2)`.
pub fn kernel_eval(kernel: &Kernel, x: &[f64], y: &[f64]) -> Result<f64, ModelError> {
    if x.len() != y.len() {
        return Err(ModelError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    match kernel {
        Kernel::Linear => Ok(x.iter().zip(y).map(|(a, b)| a * b).sum()),
        Kernel::Rbf { gamma } => {
            if *gamma <= 0.0 {
                return Err(ModelError::InvalidHyperparameter(format!(
                    "rbf gamma {gamma} must be positive"
                )));
            }
            let squared: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            Ok((-gamma * squared).exp())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvcConfig {
    /// Box bound on the dual coefficients.
    pub c: f64,
    pub kernel: KernelSpec,
    /// KKT violation tolerance.
    pub tol: f64,
    /// Consecutive no-progress sweeps before stopping.
    pub max_passes: usize,
    /// Multipliers at or below this are dropped from the model.
    pub alpha_cutoff: f64,
}

impl Default for SvcConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            kernel: KernelSpec::Rbf { gamma: None },
            tol: 1e-3,
            max_passes: 100,
            alpha_cutoff: 1e-8,
        }
    }
}

/// Fitted classifier: retained support vectors with signed dual
/// coefficients, the bias, and the resolved kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvcModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `y_i * alpha_i` per retained vector.
    pub coefficients: Vec<f64>,
    /// Raw `alpha_i` per retained vector, each in [0, C].
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
    pub c: f64,
    /// Full training sweeps performed.
    pub sweeps: usize,
}

impl SvcModel {
    /// `sum_i y_i alpha_i K(x_i, x) + b`.
    pub fn decision(&self, features: &[f64]) -> Result<f64, ModelError> {
        let mut value = self.bias;
        for (vector, coefficient) in self.support_vectors.iter().zip(&self.coefficients) {
            value += coefficient * kernel_eval(&self.kernel, vector, features)?;
        }
        Ok(value)
    }

    pub fn predict(&self, features: &[f64]) -> Result<u8, ModelError> {
        Ok(u8::from(self.decision(features)? >= 0.0))
    }
}

/// Population variance of every cell of the matrix, for the default gamma.
fn total_variance(features: &[Vec<f64>]) -> f64 {
    let count = (features.len() * features[0].len()) as f64;
    let mean: f64 = features.iter().flatten().sum::<f64>() / count;
    features.iter().flatten().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count
}

fn resolve_kernel(spec: &KernelSpec, features: &[Vec<f64>]) -> Result<Kernel, ModelError> {
    Ok(match spec {
        KernelSpec::Linear => Kernel::Linear,
        KernelSpec::Rbf { gamma: Some(g) } => {
            if *g <= 0.0 {
                return Err(ModelError::InvalidHyperparameter(format!(
                    "rbf gamma {g} must be positive"
                )));
            }
            Kernel::Rbf { gamma: *g }
        }
        KernelSpec::Rbf { gamma: None } => {
            let variance = total_variance(features);
            let gamma = if variance > 0.0 {
                1.0 / (features[0].len() as f64 * variance)
            } else {
                1.0
            };
            Kernel::Rbf { gamma }
        }
    })
}

const HARD_SWEEP_CAP: usize = 10_000;
const MIN_ALPHA_STEP: f64 = 1e-5;

struct Smo<'a> {
    gram: Vec<Vec<f64>>,
    y: Vec<f64>,
    c: f64,
    tol: f64,
    alphas: Vec<f64>,
    bias: f64,
    /// decision(x_k) - y_k, kept current after every step
    errors: Vec<f64>,
    features: &'a [Vec<f64>],
}

impl<'a> Smo<'a> {
    fn new(features: &'a [Vec<f64>], y: Vec<f64>, kernel: &Kernel, c: f64, tol: f64) -> Self {
        let n = features.len();
        let mut gram = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let k = kernel_eval(kernel, &features[i], &features[j]).expect("validated rows");
                gram[i][j] = k;
                gram[j][i] = k;
            }
        }
        let errors = y.iter().map(|yi| -yi).collect();
        Smo { gram, y, c, tol, alphas: vec![0.0; n], bias: 0.0, errors, features }
    }

    fn violates_kkt(&self, i: usize) -> bool {
        let r = self.y[i] * self.errors[i];
        (r < -self.tol && self.alphas[i] < self.c) || (r > self.tol && self.alphas[i] > 0.0)
    }

    /// Joint optimization of the (i, j) pair. Returns true when alphas moved.
    fn step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (alpha_i, alpha_j) = (self.alphas[i], self.alphas[j]);
        let (low, high) = if self.y[i] != self.y[j] {
            (
                (alpha_j - alpha_i).max(0.0),
                (self.c + alpha_j - alpha_i).min(self.c),
            )
        } else {
            (
                (alpha_i + alpha_j - self.c).max(0.0),
                (alpha_i + alpha_j).min(self.c),
            )
        };
        if low >= high {
            return false;
        }
        let eta = 2.0 * self.gram[i][j] - self.gram[i][i] - self.gram[j][j];
        if eta >= 0.0 {
            return false;
        }
        let raw = alpha_j - self.y[j] * (self.errors[i] - self.errors[j]) / eta;
        let new_j = raw.clamp(low, high);
        if (new_j - alpha_j).abs() < MIN_ALPHA_STEP {
            return false;
        }
        let new_i = alpha_i + self.y[i] * self.y[j] * (alpha_j - new_j);

        let delta_i = new_i - alpha_i;
        let delta_j = new_j - alpha_j;
        let b1 = self.bias
            - self.errors[i]
            - self.y[i] * delta_i * self.gram[i][i]
            - self.y[j] * delta_j * self.gram[i][j];
        let b2 = self.bias
            - self.errors[j]
            - self.y[i] * delta_i * self.gram[i][j]
            - self.y[j] * delta_j * self.gram[j][j];
        let new_bias = if new_i > 0.0 && new_i < self.c {
            b1
        } else if new_j > 0.0 && new_j < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let delta_bias = new_bias - self.bias;

        self.alphas[i] = new_i;
        self.alphas[j] = new_j;
        self.bias = new_bias;
        for k in 0..self.errors.len() {
            self.errors[k] += self.y[i] * delta_i * self.gram[i][k]
                + self.y[j] * delta_j * self.gram[j][k]
                + delta_bias;
        }
        true
    }

    /// Second-index choice: largest |E_i - E_j| first (ties to the lower
    /// index), then everything else in index order.
    fn optimize_around(&mut self, i: usize) -> bool {
        let mut best = None;
        let mut best_gap = -1.0;
        for j in 0..self.errors.len() {
            if j == i {
                continue;
            }
            let gap = (self.errors[i] - self.errors[j]).abs();
            if gap > best_gap {
                best_gap = gap;
                best = Some(j);
            }
        }
        if let Some(j) = best {
            if self.step(i, j) {
                return true;
            }
        }
        for j in 0..self.errors.len() {
            if Some(j) != best && self.step(i, j) {
                return true;
            }
        }
        false
    }

    fn run(&mut self, max_passes: usize) -> usize {
        let mut quiet_passes = 0;
        let mut sweeps = 0;
        while quiet_passes < max_passes && sweeps < HARD_SWEEP_CAP {
            let mut changed = 0;
            for i in 0..self.alphas.len() {
                if self.violates_kkt(i) && self.optimize_around(i) {
                    changed += 1;
                }
            }
            sweeps += 1;
            if changed == 0 {
                quiet_passes += 1;
            } else {
                quiet_passes = 0;
            }
        }
        sweeps
    }

    /// Re-estimate the bias after the sweeps: the mean over margin vectors
    /// (0 < alpha < C) of `y_m - f0(x_m)`, where f0 is the bias-free
    /// decision. With every multiplier at a bound there is no margin vector;
    /// the KKT conditions then only pin the bias to an interval, whose
    /// midpoint is used.
    fn refined_bias(&self, kernel: &Kernel, cutoff: f64) -> f64 {
        let raw = |m: usize| -> f64 {
            let mut decision = 0.0;
            for (idx, &alpha) in self.alphas.iter().enumerate() {
                if alpha > 0.0 {
                    decision += self.y[idx]
                        * alpha
                        * kernel_eval(kernel, &self.features[idx], &self.features[m])
                            .expect("validated rows");
                }
            }
            decision
        };

        let margin: Vec<usize> = (0..self.alphas.len())
            .filter(|&m| self.alphas[m] > cutoff && self.alphas[m] < self.c - cutoff)
            .collect();
        if !margin.is_empty() {
            return margin.iter().map(|&m| self.y[m] - raw(m)).sum::<f64>()
                / margin.len() as f64;
        }

        // alpha = 0 wants y f(x) >= 1; alpha = C wants y f(x) <= 1. Each
        // bound turns into a one-sided constraint on the bias.
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for i in 0..self.alphas.len() {
            let target = self.y[i] - raw(i);
            let at_zero = self.alphas[i] <= cutoff;
            if at_zero == (self.y[i] > 0.0) {
                lower = lower.max(target);
            } else {
                upper = upper.min(target);
            }
        }
        if lower.is_finite() && upper.is_finite() {
            (lower + upper) / 2.0
        } else if lower.is_finite() {
            lower
        } else if upper.is_finite() {
            upper
        } else {
            self.bias
        }
    }
}

/// Fit the soft-margin dual by SMO. Requires both classes in the labels.
pub fn fit_svc(
    features: &[Vec<f64>],
    labels: &[u8],
    config: &SvcConfig,
) -> Result<SvcModel, ModelError> {
    validate_training_input(features, labels)?;
    if config.c <= 0.0 {
        return Err(ModelError::InvalidHyperparameter(format!(
            "box bound C = {} must be positive",
            config.c
        )));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(ModelError::SingleClassTraining);
    }

    let kernel = resolve_kernel(&config.kernel, features)?;
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let mut smo = Smo::new(features, y, &kernel, config.c, config.tol);
    let sweeps = smo.run(config.max_passes);
    let bias = smo.refined_bias(&kernel, config.alpha_cutoff);

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    let mut alphas = Vec::new();
    for (i, &alpha) in smo.alphas.iter().enumerate() {
        if alpha > config.alpha_cutoff {
            support_vectors.push(features[i].clone());
            coefficients.push(smo.y[i] * alpha);
            alphas.push(alpha);
        }
    }
    Ok(SvcModel {
        support_vectors,
        coefficients,
        alphas,
        bias,
        kernel,
        c: config.c,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_config(c: f64) -> SvcConfig {
        SvcConfig { c, kernel: KernelSpec::Linear, ..SvcConfig::default() }
    }

    #[test]
    fn kernel_linear_dot_product() {
        assert_eq!(kernel_eval(&Kernel::Linear, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
    }

    #[test]
    fn kernel_rbf_at_zero_distance_is_one() {
        for gamma in [0.1, 1.0, 7.5] {
            let x = [0.3, -1.2, 4.4];
            assert_eq!(kernel_eval(&Kernel::Rbf { gamma }, &x, &x).unwrap(), 1.0);
        }
    }

    #[test]
    fn kernel_rbf_unit_distance() {
        let v = kernel_eval(&Kernel::Rbf { gamma: 1.0 }, &[0.0], &[1.0]).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.3679).abs() < 1e-4);
    }

    #[test]
    fn kernel_rejects_bad_input() {
        assert!(matches!(
            kernel_eval(&Kernel::Linear, &[1.0], &[1.0, 2.0]),
            Err(ModelError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            kernel_eval(&Kernel::Rbf { gamma: 0.0 }, &[1.0], &[1.0]),
            Err(ModelError::InvalidHyperparameter(_))
        ));
    }

    #[test]
    fn decision_with_no_support_vectors_returns_bias() {
        let model = SvcModel {
            support_vectors: vec![],
            coefficients: vec![],
            alphas: vec![],
            bias: -0.25,
            kernel: Kernel::Linear,
            c: 1.0,
            sweeps: 0,
        };
        assert_eq!(model.decision(&[5.0]).unwrap(), -0.25);
        assert_eq!(model.predict(&[5.0]).unwrap(), 0);
    }

    #[test]
    fn decision_hand_model() {
        let model = SvcModel {
            support_vectors: vec![vec![1.0], vec![-1.0]],
            coefficients: vec![0.5, -0.5],
            alphas: vec![0.5, 0.5],
            bias: 0.0,
            kernel: Kernel::Linear,
            c: 1.0,
            sweeps: 0,
        };
        // 0.5 * (1 * 2) + (-0.5) * (-1 * 2) = 2.0
        assert_eq!(model.decision(&[2.0]).unwrap(), 2.0);
    }

    /// Brute-force dual maximization over a fine alpha grid for the
    /// symmetric two-point problem (the equality constraint forces
    /// alpha_1 = alpha_2).
    fn two_point_grid_alpha(c: f64) -> f64 {
        let mut best = (f64::NEG_INFINITY, 0.0);
        let steps = 200_000;
        for s in 0..=steps {
            let a = c * s as f64 / steps as f64;
            // objective 2a - 2a^2 for x = -1/+1 with a linear kernel
            let objective = 2.0 * a - 2.0 * a * a;
            if objective > best.0 {
                best = (objective, a);
            }
        }
        best.1
    }

    #[test]
    fn two_point_problem_matches_grid_oracle() {
        let features = vec![vec![-1.0], vec![1.0]];
        let labels = vec![0, 1];
        let model = fit_svc(&features, &labels, &linear_config(10.0)).unwrap();
        let oracle_alpha = two_point_grid_alpha(10.0);
        assert!((oracle_alpha - 0.5).abs() < 1e-4);
        assert_eq!(model.alphas.len(), 2);
        for alpha in &model.alphas {
            assert!((alpha - 0.5).abs() < 1e-6, "alpha = {alpha}");
        }
        assert!(model.bias.abs() < 1e-6);
        assert!(model.decision(&[0.0]).unwrap().abs() < 1e-6);
        assert!((model.decision(&[1.0]).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn xor_with_rbf_separates_training_data() {
        let features = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let labels = vec![0, 1, 1, 0];
        let config = SvcConfig {
            c: 10.0,
            kernel: KernelSpec::Rbf { gamma: Some(1.0) },
            ..SvcConfig::default()
        };
        let model = fit_svc(&features, &labels, &config).unwrap();
        for (x, &y) in features.iter().zip(&labels) {
            assert_eq!(model.predict(x).unwrap(), y, "misclassified {x:?}");
        }
    }

    #[test]
    fn single_class_input_is_degenerate() {
        let features = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            fit_svc(&features, &[1, 1], &linear_config(1.0)),
            Err(ModelError::SingleClassTraining)
        ));
    }

    #[test]
    fn alphas_respect_box_bound() {
        // overlapping data forces some alphas to the bound
        let features = vec![vec![-1.0], vec![1.0], vec![0.9], vec![-0.9], vec![-0.2], vec![0.2]];
        let labels = vec![0, 1, 0, 1, 1, 0];
        let config = linear_config(1.0);
        let model = fit_svc(&features, &labels, &config).unwrap();
        assert!(!model.alphas.is_empty());
        for &alpha in &model.alphas {
            assert!(alpha >= -1e-9 && alpha <= config.c + 1e-9, "alpha = {alpha}");
        }
    }

    #[test]
    fn margin_vectors_sit_on_their_label_side() {
        let features = vec![vec![-2.0], vec![-1.5], vec![1.5], vec![2.0]];
        let labels = vec![0, 0, 1, 1];
        let model = fit_svc(&features, &labels, &linear_config(10.0)).unwrap();
        for ((vector, &alpha), coefficient) in model
            .support_vectors
            .iter()
            .zip(&model.alphas)
            .zip(&model.coefficients)
        {
            if alpha > 1e-8 && alpha < model.c - 1e-8 {
                let label_sign = coefficient.signum();
                let decision = model.decision(vector).unwrap();
                assert!(decision * label_sign > 0.0, "margin vector on wrong side");
            }
        }
    }

    #[test]
    fn default_gamma_matches_scale_rule() {
        let features = vec![vec![0.0, 2.0], vec![2.0, 0.0], vec![1.0, 1.0], vec![3.0, 1.0]];
        let labels = vec![0, 0, 1, 1];
        let model = fit_svc(&features, &labels, &SvcConfig::default()).unwrap();
        let flat = [0.0, 2.0, 2.0, 0.0, 1.0, 1.0, 3.0, 1.0];
        let mean: f64 = flat.iter().sum::<f64>() / 8.0;
        let var: f64 = flat.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 8.0;
        match model.kernel {
            Kernel::Rbf { gamma } => assert!((gamma - 1.0 / (2.0 * var)).abs() < 1e-12),
            Kernel::Linear => panic!("expected rbf"),
        }
    }
}
