//! Input-space kernel evaluation, Gram matrices, and the naive output kernel.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Supported kernel families on the input space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Gaussian,
}

/// A kernel on the input space, `k(x1, x2) = exp(-||x1 - x2||^2 / (2 sigma^2))`
/// for the Gaussian family. Bounded by 1, so the kernel bound constant is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub sigma: f64,
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::InvalidBandwidth(sigma));
        }
        Ok(Self {
            family: KernelFamily::Gaussian,
            sigma,
        })
    }

    /// Evaluate the kernel at a pair of points of equal dimension.
    pub fn eval(&self, x1: &[f64], x2: &[f64]) -> Result<f64> {
        if x1.len() != x2.len() || x1.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: x1.len(),
                got: x2.len(),
            });
        }
        match self.family {
            KernelFamily::Gaussian => {
                let sq_dist: f64 = x1
                    .iter()
                    .zip(x2)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                Ok((-sq_dist / (2.0 * self.sigma * self.sigma)).exp())
            }
        }
    }
}

/// Dense symmetric kernel matrix `K[i][j] = k(X_i, X_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(DMatrix<f64>);

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Build the Gram matrix of a point set. The upper triangle is computed once
/// and mirrored, so symmetry holds exactly.
pub fn gram_matrix(spec: &KernelSpec, points: &[Vec<f64>]) -> Result<GramMatrix> {
    if points.is_empty() {
        return Err(Error::EmptyInput("gram_matrix needs at least one point"));
    }
    let n = points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = spec.eval(&points[i], &points[j])?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(GramMatrix(k))
}

/// The indicator kernel on labels: 1 if the labels agree, 0 otherwise.
pub fn naive_output_kernel(y1: i8, y2: i8) -> Result<f64> {
    check_label(y1)?;
    check_label(y2)?;
    Ok(if y1 == y2 { 1.0 } else { 0.0 })
}

pub(crate) fn check_label(y: i8) -> Result<()> {
    if y == 1 || y == -1 {
        Ok(())
    } else {
        Err(Error::InvalidLabel(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec() -> KernelSpec {
        KernelSpec::gaussian(0.5).unwrap()
    }

    #[test]
    fn gaussian_identical_points() {
        assert_eq!(spec().eval(&[0.0], &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn gaussian_unit_separation() {
        // exp(-1 / (2 * 0.25)) = exp(-2)
        let v = spec().eval(&[0.0], &[1.0]).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.1353352832366127).abs() < 1e-12);
    }

    #[test]
    fn gaussian_two_unit_separation() {
        // frozen from an independent scalar evaluation of exp(-8)
        let v = spec().eval(&[-1.0], &[1.0]).unwrap();
        assert!((v - 3.3546262790251185e-4).abs() < 1e-16);
    }

    #[test]
    fn invalid_bandwidth_rejected() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::gaussian(-1.0).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(matches!(
            spec().eval(&[0.0, 1.0], &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gram_single_point() {
        let g = gram_matrix(&spec(), &[vec![3.0]]).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.get(0, 0), 1.0);
    }

    #[test]
    fn gram_two_points() {
        let g = gram_matrix(&spec(), &[vec![0.0], vec![1.0]]).unwrap();
        let e2 = (-2.0f64).exp();
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(1, 1), 1.0);
        assert!((g.get(0, 1) - e2).abs() < 1e-15);
        assert_eq!(g.get(0, 1), g.get(1, 0));
    }

    #[test]
    fn gram_empty_rejected() {
        assert!(matches!(
            gram_matrix(&spec(), &[]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn gram_psd_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let points: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
        let g = gram_matrix(&spec(), &points).unwrap();
        let eigs = g.as_matrix().clone().symmetric_eigenvalues();
        assert!(eigs.iter().all(|&e| e >= -1e-10), "eigs = {eigs:?}");
    }

    #[test]
    fn naive_kernel_table() {
        assert_eq!(naive_output_kernel(1, 1).unwrap(), 1.0);
        assert_eq!(naive_output_kernel(1, -1).unwrap(), 0.0);
        assert_eq!(naive_output_kernel(-1, -1).unwrap(), 1.0);
        assert!(matches!(naive_output_kernel(0, 1), Err(Error::InvalidLabel(0))));
    }

    proptest! {
        #[test]
        fn kernel_symmetric_and_bounded(
            x1 in prop::collection::vec(-5.0f64..5.0, 1..4),
            shift in prop::collection::vec(-5.0f64..5.0, 1..4),
        ) {
            let d = x1.len().min(shift.len());
            let a = &x1[..d];
            let b: Vec<f64> = a.iter().zip(&shift[..d]).map(|(x, s)| x + s).collect();
            let s = spec();
            let v = s.eval(a, &b).unwrap();
            prop_assert_eq!(v, s.eval(&b, a).unwrap());
            prop_assert!(v > 0.0 && v <= 1.0);
        }

        #[test]
        fn gram_psd_property(
            pts in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 1..12)
        ) {
            let g = gram_matrix(&spec(), &pts).unwrap();
            let eigs = g.as_matrix().clone().symmetric_eigenvalues();
            prop_assert!(eigs.iter().all(|&e| e >= -1e-10));
        }
    }
}
