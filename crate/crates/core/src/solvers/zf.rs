//! Regularized zero-forcing, `x = H^H (H H^H + ξI)⁻¹ b`, by Cholesky.

use nalgebra::linalg::Cholesky;
use nalgebra::Dyn;

use crate::{Complex64, ComplexMatrix, ComplexVector, Error, Result};

use super::check_len;

/// Factorized Gram matrix of one channel realization, reusable across symbol vectors.
#[derive(Debug, Clone)]
pub struct ZfPrecoder {
    channel: ComplexMatrix,
    factor: Cholesky<Complex64, Dyn>,
}

impl ZfPrecoder {
    pub fn new(h: &ComplexMatrix, regularization: f64) -> Result<Self> {
        if !(regularization >= 0.0) || !regularization.is_finite() {
            return Err(Error::InvalidParameter("regularization must be finite and nonnegative".into()));
        }
        if h.nrows() == 0 || h.ncols() == 0 {
            return Err(Error::Empty);
        }
        let mut gram = h * h.adjoint();
        for i in 0..gram.nrows() {
            gram[(i, i)] += Complex64::new(regularization, 0.0);
        }
        let factor = gram.cholesky().ok_or(Error::Singular)?;
        // Rounding can leave tiny positive pivots on an exactly singular Gram matrix.
        let pivots = factor.l_dirty().diagonal().map(|d| d.re * d.re);
        if pivots.min() <= f64::EPSILON * pivots.len() as f64 * pivots.max() {
            return Err(Error::Singular);
        }
        Ok(Self {
            channel: h.clone(),
            factor,
        })
    }

    /// `(H H^H + ξI)⁻¹ v`.
    pub fn gram_solve(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.channel.nrows(), v.len())?;
        Ok(self.factor.solve(v))
    }

    pub fn precode(&self, b: &ComplexVector) -> Result<ComplexVector> {
        let w = self.gram_solve(b)?;
        Ok(self.channel.ad_mul(&w))
    }

    /// The full precoding matrix `H^H (H H^H + ξI)⁻¹`.
    pub fn matrix(&self) -> ComplexMatrix {
        let inv = self.factor.inverse();
        self.channel.adjoint() * inv
    }
}

pub fn zf_precode(h: &ComplexMatrix, b: &ComplexVector, regularization: f64) -> Result<ComplexVector> {
    ZfPrecoder::new(h, regularization)?.precode(b)
}

/// Flop estimate for one regularized ZF precode of an `rows × cols` channel:
/// Gram product `8r²c`, Cholesky `8r³/3`, two triangular solves `8r²`, and
/// the final `H^H w` product `8rc`.
pub fn zf_flops(rows: usize, cols: usize) -> u64 {
    let (r, c) = (rows as u64, cols as u64);
    8 * r * r * c + 8 * r * r * r / 3 + 8 * r * r + 8 * r * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn identity_channel_is_transparent() {
        let b = ComplexVector::from_fn(4, |i, _| Complex64::new(i as f64, -1.0));
        let x = zf_precode(&ComplexMatrix::identity(4, 4), &b, 0.0).unwrap();
        assert!((x - b).norm() < 1e-14);
    }

    #[test]
    fn unregularized_zf_removes_interference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_matrix(6, 10, &mut rng);
        let b = random_matrix(6, 1, &mut rng).column(0).into_owned();
        let x = zf_precode(&h, &b, 0.0).unwrap();
        assert!((&h * x - b).norm() < 1e-10);
    }

    #[test]
    fn matrix_form_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = random_matrix(5, 7, &mut rng);
        let b = random_matrix(5, 1, &mut rng).column(0).into_owned();
        let zf = ZfPrecoder::new(&h, 0.1).unwrap();
        let direct = h.adjoint() * (&h * h.adjoint() + ComplexMatrix::identity(5, 5) * Complex64::new(0.1, 0.0))
            .try_inverse()
            .unwrap();
        assert!((zf.matrix() - &direct).norm() < 1e-10);
        assert!((zf.precode(&b).unwrap() - direct * b).norm() < 1e-10);
    }

    #[test]
    fn rank_deficient_needs_regularization() {
        let h = ComplexMatrix::from_element(3, 3, Complex64::new(1.0, 0.0));
        assert!(matches!(ZfPrecoder::new(&h, 0.0), Err(Error::Singular)));
        assert!(ZfPrecoder::new(&h, 1e-3).is_ok());
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = ComplexMatrix::identity(3, 3);
        assert!(ZfPrecoder::new(&h, -1.0).is_err());
        assert!(zf_precode(&h, &ComplexVector::zeros(2), 0.0).is_err());
    }

    #[test]
    fn flop_formula() {
        assert_eq!(zf_flops(3, 6), 8 * 9 * 6 + 8 * 27 / 3 + 8 * 9 + 8 * 18);
    }
}
