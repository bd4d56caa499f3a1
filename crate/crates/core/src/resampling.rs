//! Label resampling under a candidate regression function, tie-broken rank
//! statistics, and the accept/reject decision.
//!
//! The original sample is compared against `m - 1` alternative samples whose
//! labels are redrawn on the same inputs from the conditional law the
//! candidate induces. Under the null hypothesis all `m` samples are
//! exchangeable, so the tie-broken rank of the original is uniform on
//! `{1, ..., m}` and the acceptance probability of `p_lo <= rank <= q_hi`
//! is exactly `(q_hi - p_lo + 1) / m`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::embedding::{eval_vvkt, fit_vvkt, reference_variable};
use crate::error::{Error, Result};
use crate::estimators::{pet_mean_map, KnnEstimator};
use crate::kernels::{check_label, KernelSpec};
use crate::RegressionFn;

/// A set of input points paired with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    inputs: Vec<Vec<f64>>,
    labels: Vec<i8>,
}

impl LabeledSample {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyInput("sample needs at least one point"));
        }
        if inputs.len() != labels.len() {
            return Err(Error::InvalidConfig(format!(
                "{} inputs but {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        let d = inputs[0].len();
        for x in &inputs {
            if x.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: x.len(),
                });
            }
        }
        for &y in &labels {
            check_label(y)?;
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }
}

/// Which conditional mean map estimator drives the reference variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Regularized vector-valued kernel estimator.
    Vvkt,
    /// Point estimation via a conditional probability estimator (kNN).
    Pet,
}

/// Full configuration of a single hypothesis test run.
#[derive(Debug, Clone)]
pub struct TestConfig {
    /// Resampling count, total number of datasets compared.
    pub m: usize,
    /// Lower acceptance bound (inclusive).
    pub p_lo: usize,
    /// Upper acceptance bound (inclusive).
    pub q_hi: usize,
    pub estimator: EstimatorKind,
    pub kernel: KernelSpec,
    pub lambda: f64,
    pub k_neighbors: usize,
    pub seed: u64,
}

impl TestConfig {
    /// Default configuration: acceptance region `[1, m - 2]`, so the type I
    /// error probability is `2 / m`.
    pub fn new(m: usize, estimator: EstimatorKind, n: usize, seed: u64) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidConfig(format!("m = {m} too small for q_hi = m - 2")));
        }
        let cfg = Self {
            m,
            p_lo: 1,
            q_hi: m - 2,
            estimator,
            kernel: KernelSpec::gaussian(0.5)?,
            lambda: Self::default_lambda(n),
            k_neighbors: Self::default_k(n),
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Regularization schedule `n^(-1/4)`, decaying slower than `n^(-1/2)`.
    pub fn default_lambda(n: usize) -> f64 {
        (n as f64).powf(-0.25)
    }

    /// `floor(sqrt(n))` neighbors.
    pub fn default_k(n: usize) -> usize {
        ((n as f64).sqrt().floor() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidConfig(format!("m = {} must be >= 2", self.m)));
        }
        if !(1 <= self.p_lo && self.p_lo <= self.q_hi && self.q_hi <= self.m) {
            return Err(Error::InvalidConfig(format!(
                "acceptance bounds must satisfy 1 <= p_lo <= q_hi <= m, got p_lo = {}, q_hi = {}, m = {}",
                self.p_lo, self.q_hi, self.m
            )));
        }
        match self.estimator {
            EstimatorKind::Vvkt => {
                if self.lambda.is_nan() || self.lambda <= 0.0 {
                    return Err(Error::InvalidRegularization(self.lambda));
                }
            }
            EstimatorKind::Pet => {
                if self.k_neighbors == 0 {
                    return Err(Error::InvalidHyperparameter(
                        "k_neighbors must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Acceptance probability under the null, `(q_hi - p_lo + 1) / m`.
    pub fn nominal_acceptance(&self) -> f64 {
        (self.q_hi - self.p_lo + 1) as f64 / self.m as f64
    }
}

/// Outcome of a single test run.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    /// Tie-broken rank of the original sample, in `[1, m]`.
    pub rank: usize,
    pub accepted: bool,
    /// Reference variables, original first.
    pub z_values: Vec<f64>,
    /// Tie-break permutation of `{1, ..., m}`; entry `j - 1` tags alternative
    /// `j` and the last entry tags the original sample.
    pub permutation: Vec<usize>,
}

/// Draw one label per input from the conditional law the candidate induces:
/// `+1` iff a uniform draw on `(-1, 1)` falls at or below `f(X_i)`.
pub fn resample_labels<R: Rng>(
    inputs: &[Vec<f64>],
    f: &dyn RegressionFn,
    rng: &mut R,
) -> Result<Vec<i8>> {
    inputs
        .iter()
        .map(|x| {
            let v = f.value(x);
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::InvalidCandidate(v));
            }
            let u: f64 = rng.random_range(-1.0..1.0);
            Ok(if u <= v { 1 } else { -1 })
        })
        .collect()
}

/// Tie-broken rank of `z0` among all `m` values: `1` plus the number of
/// alternatives that strictly precede it, where an alternative with an equal
/// value precedes iff its permutation tag is smaller than the original's.
pub fn rank_with_ties(z0: f64, z_alts: &[f64], permutation: &[usize]) -> Result<usize> {
    let m = z_alts.len() + 1;
    if permutation.len() != m {
        return Err(Error::InvalidPermutation(format!(
            "permutation length {} does not match m = {m}",
            permutation.len()
        )));
    }
    let mut seen = vec![false; m];
    for &t in permutation {
        if t < 1 || t > m || seen[t - 1] {
            return Err(Error::InvalidPermutation(format!(
                "not a permutation of 1..={m}: {permutation:?}"
            )));
        }
        seen[t - 1] = true;
    }
    let tag0 = permutation[m - 1];
    let preceding = z_alts
        .iter()
        .enumerate()
        .filter(|&(j, &z)| z < z0 || (z == z0 && permutation[j] < tag0))
        .count();
    Ok(1 + preceding)
}

/// Run the full test: resample `m - 1` alternative label sets on the shared
/// inputs, compute all reference variables under the configured estimator,
/// draw the tie-break permutation, and rank the original sample.
///
/// Deterministic given `(sample, f, config.seed)`: all label uniforms are
/// consumed in row-major `(i, j)` order before the permutation is drawn, so
/// the parallel estimator fits cannot affect the result.
pub fn run_test(sample: &LabeledSample, f: &dyn RegressionFn, config: &TestConfig) -> Result<TestOutcome> {
    config.validate()?;
    let n = sample.len();
    let m = config.m;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // pre-draw all uniforms, U[i][j] for input i and alternative dataset j+1
    let mut uniforms = vec![vec![0.0f64; m - 1]; n];
    for row in uniforms.iter_mut() {
        for u in row.iter_mut() {
            *u = rng.random_range(-1.0..1.0);
        }
    }
    let f_values: Vec<f64> = sample
        .inputs()
        .iter()
        .map(|x| {
            let v = f.value(x);
            if (-1.0..=1.0).contains(&v) {
                Ok(v)
            } else {
                Err(Error::InvalidCandidate(v))
            }
        })
        .collect::<Result<_>>()?;

    let mut permutation: Vec<usize> = (1..=m).collect();
    permutation.shuffle(&mut rng);

    let mut datasets: Vec<LabeledSample> = Vec::with_capacity(m);
    datasets.push(sample.clone());
    for j in 0..m - 1 {
        let labels: Vec<i8> = (0..n)
            .map(|i| if uniforms[i][j] <= f_values[i] { 1 } else { -1 })
            .collect();
        datasets.push(LabeledSample::new(sample.inputs().to_vec(), labels)?);
    }

    let z_values: Vec<f64> = datasets
        .par_iter()
        .map(|d| match config.estimator {
            EstimatorKind::Vvkt => {
                let model = fit_vvkt(d, &config.kernel, config.lambda)?;
                reference_variable(sample.inputs(), f, |x| eval_vvkt(&model, x))
            }
            EstimatorKind::Pet => {
                let est = KnnEstimator::fit(d, config.k_neighbors)?;
                reference_variable(sample.inputs(), f, |x| pet_mean_map(&est, x))
            }
        })
        .collect::<Result<_>>()?;

    let rank = rank_with_ties(z_values[0], &z_values[1..], &permutation)?;
    let accepted = config.p_lo <= rank && rank <= config.q_hi;
    Ok(TestOutcome {
        rank,
        accepted,
        z_values,
        permutation,
    })
}
