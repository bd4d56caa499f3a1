//! Synthetic two-Gaussian-class logistic model with uniform inputs on [-1, 1].

use rand::Rng;

use crate::error::{Error, Result};
use crate::resampling::{resample_labels, LabeledSample};
use crate::RegressionFn;

/// Parameters of the two-class mixture regression model. With the defaults
/// `(p_star, lambda_star, mu1, mu2) = (0.5, 1, 1, -1)` the regression
/// function reduces to `tanh(2x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureParams {
    pub p_star: f64,
    pub lambda_star: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl Default for MixtureParams {
    fn default() -> Self {
        Self {
            p_star: 0.5,
            lambda_star: 1.0,
            mu1: 1.0,
            mu2: -1.0,
        }
    }
}

impl MixtureParams {
    pub fn new(p_star: f64, lambda_star: f64, mu1: f64, mu2: f64) -> Result<Self> {
        if p_star.is_nan() || p_star <= 0.0 || p_star >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "p_star = {p_star} must lie in (0, 1)"
            )));
        }
        if lambda_star.is_nan() || lambda_star <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "lambda_star = {lambda_star} must be positive"
            )));
        }
        Ok(Self {
            p_star,
            lambda_star,
            mu1,
            mu2,
        })
    }

    /// A candidate from the same family with the class weight and width
    /// replaced and the translation parameters kept.
    pub fn candidate(&self, p: f64, lambda: f64) -> Result<Self> {
        Self::new(p, lambda, self.mu1, self.mu2)
    }
}

/// The model regression function,
/// `(p e^{-(x-mu1)^2/l} - (1-p) e^{-(x-mu2)^2/l}) / (p e^{-(x-mu1)^2/l} + (1-p) e^{-(x-mu2)^2/l})`,
/// evaluated with the larger exponent factored out so neither exponential
/// underflows.
pub fn true_regression(params: &MixtureParams, x: f64) -> f64 {
    let e1 = -(x - params.mu1) * (x - params.mu1) / params.lambda_star;
    let e2 = -(x - params.mu2) * (x - params.mu2) / params.lambda_star;
    let shift = e1.max(e2);
    let a = params.p_star * (e1 - shift).exp();
    let b = (1.0 - params.p_star) * (e2 - shift).exp();
    (a - b) / (a + b)
}

impl RegressionFn for MixtureParams {
    fn value(&self, x: &[f64]) -> f64 {
        true_regression(self, x[0])
    }
}

/// Draw a sample of size `n`: inputs i.i.d. uniform on [-1, 1], labels drawn
/// against the given regression function.
pub fn sample_dataset<R: Rng>(n: usize, f: &dyn RegressionFn, rng: &mut R) -> Result<LabeledSample> {
    if n == 0 {
        return Err(Error::EmptyInput("sample_dataset needs n >= 1"));
    }
    let inputs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
    let labels = resample_labels(&inputs, f, rng)?;
    LabeledSample::new(inputs, labels)
}
