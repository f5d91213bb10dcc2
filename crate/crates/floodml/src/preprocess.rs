//! Train/test splitting and standard scaling.
//!
//! The split shuffles row indices with a seeded ChaCha8 generator
//! (Fisher-Yates) and takes the first `floor(ratio * n)` rows as the
//! training set. Scaling is fit on the training rows only and applied to
//! both sides with the train-fitted parameters.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Name of the shuffle generator, recorded in run provenance.
pub const SHUFFLE_ALGORITHM: &str = "Fisher-Yates over row indices, ChaCha8 seeded";

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("need at least 2 rows to split, got {0}")]
    TooFewRows(usize),
    #[error("split ratio {0} outside (0, 1)")]
    InvalidRatio(f64),
    #[error("feature matrix and label vector lengths differ ({features} vs {labels})")]
    LengthMismatch { features: usize, labels: usize },
    #[error("empty feature matrix")]
    EmptyMatrix,
    #[error("ragged feature matrix: row {row} has {got} columns, expected {expected}")]
    RaggedMatrix { row: usize, got: usize, expected: usize },
    #[error("matrix has {got} columns but the scaler was fit on {expected}")]
    ColumnCountMismatch { got: usize, expected: usize },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
}

/// Per-column mean and population standard deviation learned on train data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub column_names: Vec<String>,
}

impl ScalerParams {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn is_constant(&self, column: usize) -> bool {
        self.stds[column] == 0.0
    }

    /// Names of zero-variance columns.
    pub fn constant_columns(&self) -> Vec<&str> {
        self.column_names
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_constant(*i))
            .map(|(_, name)| name.as_str())
            .collect()
    }

    /// Exempt the named columns from scaling by pinning them to the identity
    /// transform (mean 0, std 1).
    pub fn exempt_columns(mut self, names: &[String]) -> Result<Self, PreprocessError> {
        for name in names {
            let idx = self
                .column_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| PreprocessError::UnknownColumn(name.clone()))?;
            self.means[idx] = 0.0;
            self.stds[idx] = 1.0;
        }
        Ok(self)
    }

    /// Apply `(x - mean) / std` per column; zero-variance columns map to 0.
    pub fn transform(&self, matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, PreprocessError> {
        matrix
            .iter()
            .map(|row| {
                if row.len() != self.len() {
                    return Err(PreprocessError::ColumnCountMismatch {
                        got: row.len(),
                        expected: self.len(),
                    });
                }
                Ok(row
                    .iter()
                    .enumerate()
                    .map(|(c, &x)| {
                        if self.stds[c] == 0.0 {
                            0.0
                        } else {
                            (x - self.means[c]) / self.stds[c]
                        }
                    })
                    .collect())
            })
            .collect()
    }

    /// Undo the transform: `x * std + mean`. Constant columns recover the
    /// column mean, which equals every original cell.
    pub fn inverse_transform(&self, matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, PreprocessError> {
        matrix
            .iter()
            .map(|row| {
                if row.len() != self.len() {
                    return Err(PreprocessError::ColumnCountMismatch {
                        got: row.len(),
                        expected: self.len(),
                    });
                }
                Ok(row
                    .iter()
                    .enumerate()
                    .map(|(c, &z)| z * self.stds[c] + self.means[c])
                    .collect())
            })
            .collect()
    }

    /// Audit CSV of (column_name, mean, std). Floats use the shortest
    /// round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("column,mean,std\n");
        for ((name, mean), std) in self.column_names.iter().zip(&self.means).zip(&self.stds) {
            out.push_str(&format!("{name},{mean},{std}\n"));
        }
        out
    }
}

/// A seeded 80:20-style partition of a feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train_features: Vec<Vec<f64>>,
    pub train_labels: Vec<u8>,
    pub test_features: Vec<Vec<f64>>,
    pub test_labels: Vec<u8>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

impl SplitDataset {
    /// Two-column CSV of (row_index, partition), ordered by row index, so a
    /// run can be replayed exactly.
    pub fn indices_csv(&self) -> String {
        let mut partition = vec!["test"; self.train_indices.len() + self.test_indices.len()];
        for &i in &self.train_indices {
            partition[i] = "train";
        }
        let mut out = String::from("row_index,partition\n");
        for (i, p) in partition.iter().enumerate() {
            out.push_str(&format!("{i},{p}\n"));
        }
        out
    }
}

/// Shuffled index partition: the first `floor(ratio * n)` shuffled indices
/// form the training set. Deterministic per (n, ratio, seed).
pub fn split_indices(
    n: usize,
    ratio: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), PreprocessError> {
    if n < 2 {
        return Err(PreprocessError::TooFewRows(n));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(PreprocessError::InvalidRatio(ratio));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train_size = (ratio * n as f64).floor() as usize;
    let test = indices.split_off(train_size);
    Ok((indices, test))
}

/// Split a feature matrix and its labels into train and test partitions.
pub fn train_test_split(
    features: &[Vec<f64>],
    labels: &[u8],
    ratio: f64,
    seed: u64,
) -> Result<SplitDataset, PreprocessError> {
    if features.len() != labels.len() {
        return Err(PreprocessError::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    let (train_indices, test_indices) = split_indices(features.len(), ratio, seed)?;
    let gather = |indices: &[usize]| -> (Vec<Vec<f64>>, Vec<u8>) {
        indices
            .iter()
            .map(|&i| (features[i].clone(), labels[i]))
            .unzip()
    };
    let (train_features, train_labels) = gather(&train_indices);
    let (test_features, test_labels) = gather(&test_indices);
    Ok(SplitDataset {
        train_features,
        train_labels,
        test_features,
        test_labels,
        train_indices,
        test_indices,
        seed,
        ratio,
    })
}

/// Fit per-column mean and population standard deviation (divisor n).
pub fn fit_scaler(
    matrix: &[Vec<f64>],
    column_names: &[String],
) -> Result<ScalerParams, PreprocessError> {
    if matrix.is_empty() {
        return Err(PreprocessError::EmptyMatrix);
    }
    let columns = matrix[0].len();
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != columns {
            return Err(PreprocessError::RaggedMatrix {
                row: i,
                got: row.len(),
                expected: columns,
            });
        }
    }
    if column_names.len() != columns {
        return Err(PreprocessError::ColumnCountMismatch {
            got: column_names.len(),
            expected: columns,
        });
    }
    let n = matrix.len() as f64;
    let mut means = vec![0.0; columns];
    for row in matrix {
        for (c, &x) in row.iter().enumerate() {
            means[c] += x;
        }
    }
    for mean in means.iter_mut() {
        *mean /= n;
    }
    let mut stds = vec![0.0; columns];
    for row in matrix {
        for (c, &x) in row.iter().enumerate() {
            let d = x - means[c];
            stds[c] += d * d;
        }
    }
    for std in stds.iter_mut() {
        *std = (*std / n).sqrt();
    }
    Ok(ScalerParams { means, stds, column_names: column_names.to_vec() })
}
