//! Conditional probability estimators for the point-estimation test path.

use crate::embedding::GVec;
use crate::error::{Error, Result};
use crate::resampling::LabeledSample;

/// A fitted conditional probability estimator, `predict(x)` approximating
/// `P(Y = +1 | X = x)`.
pub trait ProbEstimator: Sync {
    fn predict(&self, x: &[f64]) -> Result<f64>;
}

/// k-nearest-neighbor probability estimate under Euclidean distance.
///
/// Distance ties are broken by lower training index; a query that coincides
/// with a training point treats that point as an ordinary neighbor.
#[derive(Debug, Clone)]
pub struct KnnEstimator {
    k: usize,
    inputs: Vec<Vec<f64>>,
    labels: Vec<i8>,
}

impl KnnEstimator {
    pub fn fit(sample: &LabeledSample, k: usize) -> Result<Self> {
        if k == 0 || k > sample.len() {
            return Err(Error::InvalidHyperparameter(format!(
                "k = {k} must satisfy 1 <= k <= n = {}",
                sample.len()
            )));
        }
        Ok(Self {
            k,
            inputs: sample.inputs().to_vec(),
            labels: sample.labels().to_vec(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl ProbEstimator for KnnEstimator {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.inputs[0].len() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs[0].len(),
                got: x.len(),
            });
        }
        let mut dist_idx: Vec<(f64, usize)> = self
            .inputs
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let d: f64 = x.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        // stable sort on distance keeps lower indices first among ties
        dist_idx.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let positives = dist_idx
            .iter()
            .take(self.k)
            .filter(|&&(_, i)| self.labels[i] == 1)
            .count();
        Ok(positives as f64 / self.k as f64)
    }
}

/// Plug a probability estimate into the closed-form conditional mean map,
/// `(1 - p(x)) l(., -1) + p(x) l(., +1)`.
pub fn pet_mean_map(estimator: &dyn ProbEstimator, x: &[f64]) -> Result<GVec> {
    Ok(GVec::from_prob(estimator.predict(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_sample() -> LabeledSample {
        LabeledSample::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            vec![1, -1, 1, 1, -1],
        )
        .unwrap()
    }

    /// Full exhaustive sort over all training points, kept deliberately
    /// separate from the implementation path.
    fn brute_force_knn(sample: &LabeledSample, k: usize, x: &[f64]) -> f64 {
        let mut order: Vec<usize> = (0..sample.len()).collect();
        let dist = |i: usize| -> f64 {
            x.iter()
                .zip(&sample.inputs()[i])
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        };
        order.sort_by(|&i, &j| dist(i).partial_cmp(&dist(j)).unwrap().then(i.cmp(&j)));
        let pos = order[..k].iter().filter(|&&i| sample.labels()[i] == 1).count();
        pos as f64 / k as f64
    }

    #[test]
    fn k_equals_n_gives_global_fraction() {
        let s = line_sample();
        let est = KnnEstimator::fit(&s, 5).unwrap();
        assert_eq!(est.predict(&[10.0]).unwrap(), 3.0 / 5.0);
    }

    #[test]
    fn k_one_at_training_point() {
        let s = line_sample();
        let est = KnnEstimator::fit(&s, 1).unwrap();
        assert_eq!(est.predict(&[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn five_point_fixture_matches_oracle() {
        let s = line_sample();
        let est = KnnEstimator::fit(&s, 3).unwrap();
        for x in [-0.5, 0.4, 1.5, 2.5, 3.9, 5.0] {
            assert_eq!(est.predict(&[x]).unwrap(), brute_force_knn(&s, 3, &[x]));
        }
    }

    #[test]
    fn k_larger_than_n_rejected() {
        let s = line_sample();
        assert!(matches!(
            KnnEstimator::fit(&s, 6),
            Err(Error::InvalidHyperparameter(_))
        ));
        assert!(KnnEstimator::fit(&s, 0).is_err());
    }

    #[test]
    fn prediction_range_and_granularity() {
        let s = line_sample();
        for k in 1..=5 {
            let est = KnnEstimator::fit(&s, k).unwrap();
            for x in [-2.0, 0.3, 2.2, 7.0] {
                let p = est.predict(&[x]).unwrap();
                assert!((0.0..=1.0).contains(&p));
                let scaled = p * k as f64;
                assert!((scaled - scaled.round()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_fixtures_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.random_range(1..=8usize);
            let inputs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
            let labels: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
            let s = LabeledSample::new(inputs, labels).unwrap();
            let k = rng.random_range(1..=n);
            let est = KnnEstimator::fit(&s, k).unwrap();
            let x = [rng.random_range(-1.5..1.5)];
            assert_eq!(est.predict(&x).unwrap(), brute_force_knn(&s, k, &x));
        }
    }

    #[test]
    fn tie_break_uses_lower_index() {
        // two training points equidistant from the query, opposite labels
        let s = LabeledSample::new(vec![vec![-1.0], vec![1.0], vec![5.0]], vec![1, -1, -1]).unwrap();
        let est = KnnEstimator::fit(&s, 1).unwrap();
        assert_eq!(est.predict(&[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn permutation_invariance_without_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let inputs: Vec<Vec<f64>> = (0..7).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
        let labels: Vec<i8> = (0..7).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        let s = LabeledSample::new(inputs.clone(), labels.clone()).unwrap();
        let mut rev_inputs = inputs;
        rev_inputs.reverse();
        let mut rev_labels = labels;
        rev_labels.reverse();
        let s_rev = LabeledSample::new(rev_inputs, rev_labels).unwrap();
        for k in [1, 3, 7] {
            let a = KnnEstimator::fit(&s, k).unwrap();
            let b = KnnEstimator::fit(&s_rev, k).unwrap();
            for x in [-0.9, 0.05, 0.81] {
                assert_eq!(a.predict(&[x]).unwrap(), b.predict(&[x]).unwrap());
            }
        }
    }

    #[test]
    fn pet_mean_map_examples() {
        struct Fixed(f64);
        impl ProbEstimator for Fixed {
            fn predict(&self, _: &[f64]) -> Result<f64> {
                Ok(self.0)
            }
        }
        assert_eq!(pet_mean_map(&Fixed(0.0), &[0.0]).unwrap(), GVec::new(0.0, 1.0));
        assert_eq!(pet_mean_map(&Fixed(1.0), &[0.0]).unwrap(), GVec::new(1.0, 0.0));
        let g = pet_mean_map(&Fixed(0.25), &[0.0]).unwrap();
        assert_eq!(g, GVec::new(0.25, 0.75));
        assert!((g.plus + g.minus - 1.0).abs() < 1e-15);
    }
}
