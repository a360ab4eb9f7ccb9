//! Discrete affine Fourier transform and AFDM (de)modulation.
//!
//! The DAFT matrix is `A = Λ_{c1}^H F^H Λ_{c2}^H` with
//! `Λ_c = diag(e^{-j2πcn²})` and `F(m, n) = e^{-j2πmn/N}/√N`, so that
//!
//! ```text
//! A(n, m) = e^{j2π(c1·n² + n·m/N + c2·m²)} / √N
//! ```
//!
//! `A` is unitary. With `c1 = c2 = 0` it is the inverse DFT and AFDM reduces
//! to OFDM. Transforms are realized as dense products.

use std::f64::consts::PI;

use crate::{Complex64, ComplexMatrix, ComplexVector, Error, Result};

/// Chirp subcarrier count and chirp rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfdmParams {
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
}

impl AfdmParams {
    pub fn new(n: usize, c1: f64, c2: f64) -> Result<Self> {
        let params = Self { n, c1, c2 };
        params.validate()?;
        Ok(params)
    }

    /// AFDM with `c1` from [`default_c1`] and `c2 = 0`.
    pub fn for_max_doppler(n: usize, alpha_max: u32) -> Result<Self> {
        Self::new(n, default_c1(alpha_max, n), 0.0)
    }

    /// The OFDM special case `c1 = c2 = 0`.
    pub fn ofdm(n: usize) -> Result<Self> {
        Self::new(n, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        if !self.c1.is_finite() || !self.c2.is_finite() {
            return Err(Error::InvalidParameter("chirp rates must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }
}

/// `e^{j2π·turns}` with the integer part of `turns` removed first.
pub(crate) fn cis_turns(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (turns - turns.round()))
}

/// Builds the N×N DAFT matrix `A`.
pub fn build_daft_matrix(params: &AfdmParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let n = params.n;
    let nf = n as f64;
    let scale = 1.0 / nf.sqrt();
    Ok(ComplexMatrix::from_fn(n, n, |row, col| {
        let (r, c) = (row as f64, col as f64);
        // n·m/N is reduced exactly in integers before going to floats.
        let grid = ((row * col) % n) as f64 / nf;
        cis_turns(params.c1 * r * r + grid + params.c2 * c * c) * scale
    }))
}

/// `s = A·x`.
pub fn daft_modulate(x: &ComplexVector, params: &AfdmParams) -> Result<ComplexVector> {
    params.check_len(x.len())?;
    Ok(build_daft_matrix(params)? * x)
}

/// `x = A^H·s`.
pub fn daft_demodulate(s: &ComplexVector, params: &AfdmParams) -> Result<ComplexVector> {
    params.check_len(s.len())?;
    Ok(build_daft_matrix(params)?.ad_mul(s))
}

/// `c1 = (2·alpha_max + 1) / (2N)`, which makes `2N·c1` the odd integer
/// `2·alpha_max + 1` so every integer delay maps to an integer DAFT shift.
pub fn default_c1(alpha_max: u32, n: usize) -> f64 {
    (2.0 * f64::from(alpha_max) + 1.0) / (2.0 * n as f64)
}
