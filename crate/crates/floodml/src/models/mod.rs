//! Four from-scratch binary classifiers behind one contract: fit on a
//! training matrix, then produce a class in {0, 1} and a real-valued
//! ranking score per example.
//!
//! Per-model scores: logistic probability, SVC decision value, KNN positive
//! vote fraction, tree leaf positive frequency.

pub mod knn;
pub mod logistic;
pub mod svc;
pub mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use knn::{fit_knn, KnnConfig, KnnModel};
pub use logistic::{fit_logistic, sigmoid, LogisticConfig, LogisticModel};
pub use svc::{fit_svc, kernel_eval, Kernel, KernelSpec, SvcConfig, SvcModel};
pub use tree::{entropy, fit_tree, information_gain, TreeConfig, TreeModel, TreeNode};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("feature vector has {got} dimensions, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("label {0} is not binary (expected 0 or 1)")]
    NonBinaryLabel(u8),
    #[error("non-finite feature at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },
    #[error("ragged feature matrix: row {row} has {got} columns, expected {expected}")]
    RaggedMatrix { row: usize, got: usize, expected: usize },
    #[error("{features} feature rows but {labels} labels")]
    LabelLengthMismatch { features: usize, labels: usize },
    #[error("training labels contain a single class; no decision boundary exists")]
    SingleClassTraining,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("model artifact: {0}")]
    Artifact(String),
}

/// The four classifier kinds, in the summary-table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Logistic,
    Svc,
    Knn,
    Tree,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Logistic, ModelKind::Svc, ModelKind::Knn, ModelKind::Tree];

    /// Short key used in file names and config.
    pub fn key(&self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::Svc => "svc",
            ModelKind::Knn => "knn",
            ModelKind::Tree => "tree",
        }
    }

    /// Human-readable name used in the summary table.
    pub fn display_name(&self) -> &'static str {
        match self {
            ModelKind::Logistic => "Binary Logistic Regression",
            ModelKind::Svc => "Support Vector Classifier (SVC)",
            ModelKind::Knn => "K-Nearest Neighbors (KNN)",
            ModelKind::Tree => "Decision Tree Classifier (DTC)",
        }
    }

    pub fn from_key(key: &str) -> Option<ModelKind> {
        ModelKind::ALL.iter().copied().find(|k| k.key() == key)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

/// A fitted classifier of any of the four kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedModel {
    Logistic(LogisticModel),
    Svc(SvcModel),
    Knn(KnnModel),
    Tree(TreeModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Logistic(_) => ModelKind::Logistic,
            TrainedModel::Svc(_) => ModelKind::Svc,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::Tree(_) => ModelKind::Tree,
        }
    }

    /// Predicted class in {0, 1}.
    pub fn predict(&self, features: &[f64]) -> Result<u8, ModelError> {
        Ok(match self {
            TrainedModel::Logistic(m) => m.predict(features, 0.5)?,
            TrainedModel::Svc(m) => m.predict(features)?,
            TrainedModel::Knn(m) => m.predict_with_score(features)?.0,
            TrainedModel::Tree(m) => m.predict_with_score(features)?.0,
        })
    }

    /// Real-valued ranking score used for the ROC curve.
    pub fn score(&self, features: &[f64]) -> Result<f64, ModelError> {
        Ok(match self {
            TrainedModel::Logistic(m) => m.predict_proba(features)?,
            TrainedModel::Svc(m) => m.decision(features)?,
            TrainedModel::Knn(m) => m.predict_with_score(features)?.1,
            TrainedModel::Tree(m) => m.predict_with_score(features)?.1,
        })
    }

    pub fn predict_batch(&self, matrix: &[Vec<f64>]) -> Result<Vec<u8>, ModelError> {
        matrix.iter().map(|row| self.predict(row)).collect()
    }

    pub fn score_batch(&self, matrix: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        matrix.iter().map(|row| self.score(row)).collect()
    }

    /// Self-describing JSON artifact; reloading reproduces predictions
    /// bit-exactly.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Artifact(e.to_string()))
    }
}

/// Shared input validation for all fit functions.
pub(crate) fn validate_training_input(
    features: &[Vec<f64>],
    labels: &[u8],
) -> Result<usize, ModelError> {
    if features.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if features.len() != labels.len() {
        return Err(ModelError::LabelLengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    let columns = features[0].len();
    for (row, values) in features.iter().enumerate() {
        if values.len() != columns {
            return Err(ModelError::RaggedMatrix { row, got: values.len(), expected: columns });
        }
        for (column, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(ModelError::NonFiniteFeature { row, column });
            }
        }
    }
    for &label in labels {
        if label > 1 {
            return Err(ModelError::NonBinaryLabel(label));
        }
    }
    Ok(columns)
}
