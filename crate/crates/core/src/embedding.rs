//! Output-space embedding vectors, the theoretical conditional mean map, and
//! the regularized vector-valued estimator.
//!
//! The output RKHS induced by the naive kernel is two dimensional with
//! orthonormal basis `{l(., +1), l(., -1)}`; every element is stored as its
//! pair of coordinates in that basis.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, KernelSpec};
use crate::resampling::LabeledSample;
use crate::RegressionFn;

/// An element of the output RKHS in the `(plus, minus)` coordinate order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GVec {
    /// Coefficient on `l(., +1)`.
    pub plus: f64,
    /// Coefficient on `l(., -1)`.
    pub minus: f64,
}

impl GVec {
    pub fn new(plus: f64, minus: f64) -> Self {
        Self { plus, minus }
    }

    /// The embedding `l(., y)` of a label, i.e. a unit coordinate vector.
    pub fn label_embedding(y: i8) -> Result<Self> {
        crate::kernels::check_label(y)?;
        Ok(if y == 1 {
            Self::new(1.0, 0.0)
        } else {
            Self::new(0.0, 1.0)
        })
    }

    /// Mean map of a conditional law with `P(Y = +1 | x) = p`.
    pub fn from_prob(p: f64) -> Self {
        Self::new(p, 1.0 - p)
    }

    pub fn norm_sq(&self) -> f64 {
        self.plus * self.plus + self.minus * self.minus
    }
}

/// Squared distance in the output RKHS.
pub fn g_distance_sq(a: GVec, b: GVec) -> f64 {
    let dp = a.plus - b.plus;
    let dm = a.minus - b.minus;
    dp * dp + dm * dm
}

/// The exact conditional mean map of the law induced by candidate `f`,
/// `(1 - p(x)) l(., -1) + p(x) l(., +1)` with `p(x) = (f(x) + 1) / 2`.
///
/// Rejects candidates whose value at `x` falls outside `[-1, 1]`.
pub fn theoretical_mean_map(f: &dyn RegressionFn, x: &[f64]) -> Result<GVec> {
    let v = f.value(x);
    if !(-1.0..=1.0).contains(&v) {
        return Err(Error::InvalidCandidate(v));
    }
    Ok(GVec::from_prob((v + 1.0) / 2.0))
}

/// Fitted regularized conditional mean map estimator. The coefficient rows
/// solve `(K + lambda I) C = L`, where row `i` of `L` is the embedding of the
/// training label `Y_i`.
#[derive(Debug, Clone)]
pub struct VvktModel {
    train_inputs: Vec<Vec<f64>>,
    kernel: KernelSpec,
    lambda: f64,
    coeffs: Vec<GVec>,
}

impl VvktModel {
    pub fn coeffs(&self) -> &[GVec] {
        &self.coeffs
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn train_inputs(&self) -> &[Vec<f64>] {
        &self.train_inputs
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }
}

/// Fit the regularized estimator on a sample via a Cholesky factorization of
/// `K + lambda I`.
pub fn fit_vvkt(sample: &LabeledSample, kernel: &KernelSpec, lambda: f64) -> Result<VvktModel> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidRegularization(lambda));
    }
    let n = sample.len();
    let gram = gram_matrix(kernel, sample.inputs())?;
    let mut a = gram.as_matrix().clone();
    for i in 0..n {
        a[(i, i)] += lambda;
    }
    let mut rhs = DMatrix::zeros(n, 2);
    for (i, &y) in sample.labels().iter().enumerate() {
        let e = GVec::label_embedding(y)?;
        rhs[(i, 0)] = e.plus;
        rhs[(i, 1)] = e.minus;
    }
    let chol = a.clone().cholesky().ok_or_else(|| {
        let eigs = a.clone().symmetric_eigenvalues();
        Error::NotPositiveDefinite {
            smallest_pivot: eigs.min(),
        }
    })?;
    let sol = chol.solve(&rhs);
    let coeffs = (0..n).map(|i| GVec::new(sol[(i, 0)], sol[(i, 1)])).collect();
    Ok(VvktModel {
        train_inputs: sample.inputs().to_vec(),
        kernel: *kernel,
        lambda,
        coeffs,
    })
}

/// Evaluate the fitted estimator, `sum_i k(x, X_i) c_i`.
pub fn eval_vvkt(model: &VvktModel, x: &[f64]) -> Result<GVec> {
    let mut out = GVec::default();
    for (xi, c) in model.train_inputs.iter().zip(&model.coeffs) {
        let w = model.kernel.eval(x, xi)?;
        out.plus += w * c.plus;
        out.minus += w * c.minus;
    }
    Ok(out)
}

/// Mean squared output-RKHS distance between the theoretical map of `f` and
/// an arbitrary evaluator, averaged over the given inputs.
pub fn reference_variable<E>(inputs: &[Vec<f64>], f: &dyn RegressionFn, evaluator: E) -> Result<f64>
where
    E: Fn(&[f64]) -> Result<GVec>,
{
    if inputs.is_empty() {
        return Err(Error::EmptyInput("reference_variable needs inputs"));
    }
    let mut acc = 0.0;
    for x in inputs {
        let target = theoretical_mean_map(f, x)?;
        acc += g_distance_sq(target, evaluator(x)?);
    }
    Ok(acc / inputs.len() as f64)
}
