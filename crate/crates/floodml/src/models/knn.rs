//! K-nearest-neighbor classification with Euclidean distance and plain
//! majority voting.
//!
//! Tie rules, applied in order: equal distances at the neighborhood boundary
//! go to the lower training-row index; an even vote goes to the class whose
//! neighbors are nearer in total; an exact total-distance tie goes to class 0.

use serde::{Deserialize, Serialize};

use super::{validate_training_input, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 5 }
    }
}

/// The training data itself plus the neighborhood size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub train_features: Vec<Vec<f64>>,
    pub train_labels: Vec<u8>,
    pub k: usize,
}

/// Straight-line distance between equal-length vectors.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

pub fn fit_knn(
    features: &[Vec<f64>],
    labels: &[u8],
    config: &KnnConfig,
) -> Result<KnnModel, ModelError> {
    validate_training_input(features, labels)?;
    if config.k == 0 || config.k > features.len() {
        return Err(ModelError::InvalidHyperparameter(format!(
            "k = {} must be in 1..={}",
            config.k,
            features.len()
        )));
    }
    Ok(KnnModel {
        train_features: features.to_vec(),
        train_labels: labels.to_vec(),
        k: config.k,
    })
}

impl KnnModel {
    /// Majority class among the k nearest neighbors, plus the fraction of
    /// those neighbors labeled 1 as the ranking score.
    pub fn predict_with_score(&self, features: &[f64]) -> Result<(u8, f64), ModelError> {
        if self.train_features.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let mut neighbors: Vec<(f64, usize)> = self
            .train_features
            .iter()
            .enumerate()
            .map(|(i, row)| Ok((euclidean_distance(row, features)?, i)))
            .collect::<Result<_, ModelError>>()?;
        neighbors.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        neighbors.truncate(self.k);

        let mut votes = [0usize; 2];
        let mut total_distance = [0.0f64; 2];
        for &(distance, index) in &neighbors {
            let label = self.train_labels[index] as usize;
            votes[label] += 1;
            total_distance[label] += distance;
        }
        let class = match votes[1].cmp(&votes[0]) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => u8::from(total_distance[1] < total_distance[0]),
        };
        Ok((class, votes[1] as f64 / self.k as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(matches!(
            euclidean_distance(&[1.0], &[1.0, 2.0]),
            Err(ModelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distance_is_symmetric() {
        let a = [1.3, -2.7, 0.4];
        let b = [-0.9, 5.5, 2.2];
        assert_eq!(euclidean_distance(&a, &b).unwrap(), euclidean_distance(&b, &a).unwrap());
    }

    fn fixture() -> KnnModel {
        fit_knn(
            &[vec![0.0], vec![1.0], vec![2.0], vec![10.0]],
            &[0, 1, 0, 1],
            &KnnConfig { k: 1 },
        )
        .unwrap()
    }

    #[test]
    fn exact_match_wins_at_k1() {
        let model = fixture();
        assert_eq!(model.predict_with_score(&[1.0]).unwrap(), (1, 1.0));
        assert_eq!(model.predict_with_score(&[2.0]).unwrap(), (0, 0.0));
    }

    #[test]
    fn majority_vote_at_k3() {
        let model = fit_knn(
            &[vec![0.0], vec![0.2], vec![0.4], vec![9.0]],
            &[1, 1, 0, 0],
            &KnnConfig { k: 3 },
        )
        .unwrap();
        let (class, score) = model.predict_with_score(&[0.1]).unwrap();
        assert_eq!(class, 1);
        assert!((score - 2.0 / 3.0).abs() < 1e-15);
    }

    /// Brute-force check of the even-vote rule on a 4-point fixture.
    #[test]
    fn even_vote_goes_to_nearer_class() {
        let features = vec![vec![0.0], vec![3.0], vec![-8.0], vec![9.0]];
        let labels = vec![0, 1, 0, 1];
        let model = fit_knn(&features, &labels, &KnnConfig { k: 2 }).unwrap();
        let query = [1.0];

        // enumerate distances by hand: the k=2 neighborhood is {0 (d=1), 3 (d=2)}
        let mut order: Vec<(f64, usize)> = features
            .iter()
            .enumerate()
            .map(|(i, x)| ((x[0] - query[0]).abs(), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!((order[0].1, order[1].1), (0, 1));

        let (class, score) = model.predict_with_score(&query).unwrap();
        assert_eq!(class, 0); // the 0-labeled neighbor is strictly nearer
        assert_eq!(score, 0.5);
    }

    #[test]
    fn distance_ties_break_by_row_index() {
        // both at distance 1 from the query; row 0 must win the k=1 slot
        let model = fit_knn(&[vec![1.0], vec![-1.0]], &[1, 0], &KnnConfig { k: 1 }).unwrap();
        assert_eq!(model.predict_with_score(&[0.0]).unwrap().0, 1);
        let swapped = fit_knn(&[vec![-1.0], vec![1.0]], &[0, 1], &KnnConfig { k: 1 }).unwrap();
        assert_eq!(swapped.predict_with_score(&[0.0]).unwrap().0, 0);
    }

    #[test]
    fn total_distance_tie_goes_to_class_zero() {
        let model = fit_knn(&[vec![-1.0], vec![1.0]], &[1, 0], &KnnConfig { k: 2 }).unwrap();
        assert_eq!(model.predict_with_score(&[0.0]).unwrap().0, 0);
    }

    #[test]
    fn fit_rejects_bad_k() {
        let features = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            fit_knn(&features, &[0, 1], &KnnConfig { k: 0 }),
            Err(ModelError::InvalidHyperparameter(_))
        ));
        assert!(matches!(
            fit_knn(&features, &[0, 1], &KnnConfig { k: 3 }),
            Err(ModelError::InvalidHyperparameter(_))
        ));
    }

    proptest! {
        #[test]
        fn k_equal_n_predicts_global_majority(
            labels in proptest::collection::vec(0u8..=1, 3..20),
            query in -10.0f64..10.0,
        ) {
            let ones = labels.iter().filter(|&&y| y == 1).count();
            prop_assume!(2 * ones != labels.len()); // skip exact global ties
            let features: Vec<Vec<f64>> =
                (0..labels.len()).map(|i| vec![i as f64 * 3.7]).collect();
            let model = fit_knn(&features, &labels, &KnnConfig { k: labels.len() }).unwrap();
            let majority = u8::from(2 * ones > labels.len());
            prop_assert_eq!(model.predict_with_score(&[query]).unwrap().0, majority);
        }

        #[test]
        fn permutation_invariant_without_distance_ties(
            seed in 0u64..500,
            query in -5.0f64..25.0,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            // distinct coordinates, so no boundary ties and index order is moot
            let features: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64 * 2.0]).collect();
            let labels: Vec<u8> = vec![0, 1, 0, 1, 1, 0, 0, 1, 0];
            let model = fit_knn(&features, &labels, &KnnConfig { k: 3 }).unwrap();
            let baseline = model.predict_with_score(&[query]).unwrap();

            let mut order: Vec<usize> = (0..features.len()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled_features: Vec<Vec<f64>> =
                order.iter().map(|&i| features[i].clone()).collect();
            let shuffled_labels: Vec<u8> = order.iter().map(|&i| labels[i]).collect();
            let shuffled =
                fit_knn(&shuffled_features, &shuffled_labels, &KnnConfig { k: 3 }).unwrap();
            prop_assert_eq!(shuffled.predict_with_score(&[query]).unwrap(), baseline);
        }
    }
}
