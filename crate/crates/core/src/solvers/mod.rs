//! Precoding solvers.
//!
//! All solvers count the real floating-point operations they execute, using
//! these unit costs:
//!
//! | operation                               | flops per element |
//! |-----------------------------------------|-------------------|
//! | complex multiply-add (products, `dotc`) | 8                 |
//! | squared magnitude accumulate            | 4                 |
//! | real scalar × complex + complex (axpy)  | 4                 |
//! | complex subtraction                     | 2                 |
//! | complex ÷ real (Jacobi step)            | 2                 |
//!
//! Scalar bookkeeping (step lengths, square roots) is not charged.

mod cg;
mod kaczmarz;
mod zf;

pub use cg::{cg_solve, pcg_precode, pcg_solve, RegularizedNormalOperator};
pub use kaczmarz::{rka_solve, swor_rka_solve, swor_rka_solve_audited};
pub use zf::{zf_flops, zf_precode, ZfPrecoder};

use std::fmt;
use std::str::FromStr;

use crate::sparse::{FlopCounter, SparseChannelMatrix};
use crate::{Complex64, ComplexMatrix, ComplexVector, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    #[default]
    None,
    /// Jacobi, `M = diag(A)^{-1}`.
    Diagonal,
}

impl FromStr for Preconditioner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "diagonal" | "jacobi" => Ok(Self::Diagonal),
            other => Err(Error::InvalidParameter(format!("unknown preconditioner {other:?}"))),
        }
    }
}

/// Iteration controls shared by the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// CG iteration cap `T_p`, or the Kaczmarz row-update budget `T_s`.
    pub max_iters: usize,
    /// Stop once `‖r‖₂ < tolerance`.
    pub tolerance: f64,
    /// Tikhonov weight `ξ ≥ 0` (inverse SNR).
    pub regularization: f64,
    pub preconditioner: Preconditioner,
}

impl SolverConfig {
    pub fn new(max_iters: usize, tolerance: f64, regularization: f64, preconditioner: Preconditioner) -> Result<Self> {
        let cfg = Self {
            max_iters,
            tolerance,
            regularization,
            preconditioner,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if !(self.regularization >= 0.0) || !self.regularization.is_finite() {
            return Err(Error::InvalidParameter("regularization must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn with_regularization(self, regularization: f64) -> Self {
        Self { regularization, ..self }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tolerance: 1e-8,
            regularization: 0.0,
            preconditioner: Preconditioner::None,
        }
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: ComplexVector,
    pub iterations: usize,
    pub final_residual_norm: f64,
    /// Real floating-point operations executed.
    pub flops: u64,
    /// `false` when the iteration budget ran out with `‖r‖ ≥ tolerance`.
    pub converged: bool,
}

/// Square operator applied through products.
pub trait LinearOperator {
    /// `(rows, cols)`; solvers require a square operator.
    fn shape(&self) -> (usize, usize);

    /// `A·x`, charging its cost to `flops`.
    fn apply(&self, x: &ComplexVector, flops: &mut FlopCounter) -> ComplexVector;

    /// Real part of the diagonal.
    fn diagonal(&self) -> Vec<f64>;

    /// Flops spent by [`LinearOperator::diagonal`].
    fn diagonal_flops(&self) -> u64 {
        0
    }
}

impl LinearOperator for ComplexMatrix {
    fn shape(&self) -> (usize, usize) {
        ComplexMatrix::shape(self)
    }

    fn apply(&self, x: &ComplexVector, flops: &mut FlopCounter) -> ComplexVector {
        flops.add(8 * (self.nrows() * self.ncols()) as u64);
        self * x
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows()).map(|i| self[(i, i)].re).collect()
    }
}

impl LinearOperator for SparseChannelMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    fn apply(&self, x: &ComplexVector, flops: &mut FlopCounter) -> ComplexVector {
        self.spmv(x, flops).expect("dimension checked by the solver")
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.rows())
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().position(|&c| c == r).map_or(0.0, |k| vals[k].re)
            })
            .collect()
    }
}

/// Precoding methods compared throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Precoder {
    Zf,
    Rka,
    SworRka,
    Pcg,
}

impl Precoder {
    pub const ALL: [Precoder; 4] = [Precoder::Zf, Precoder::Rka, Precoder::SworRka, Precoder::Pcg];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Zf => "ZF",
            Self::Rka => "rKA",
            Self::SworRka => "SwoR-rKA",
            Self::Pcg => "PCG",
        }
    }
}

impl fmt::Display for Precoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Precoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zf" => Ok(Self::Zf),
            "rka" => Ok(Self::Rka),
            "swor-rka" | "swor_rka" | "sworrka" => Ok(Self::SworRka),
            "pcg" | "cg" => Ok(Self::Pcg),
            _ => Err(Error::UnknownMethod(s.to_string())),
        }
    }
}

pub(crate) fn dotc(a: &ComplexVector, b: &ComplexVector, flops: &mut FlopCounter) -> Complex64 {
    flops.add(8 * a.len() as u64);
    a.dotc(b)
}

pub(crate) fn norm_sqr(a: &ComplexVector, flops: &mut FlopCounter) -> f64 {
    flops.add(4 * a.len() as u64);
    a.norm_squared()
}

/// `y += alpha·x` with real `alpha`.
pub(crate) fn axpy_real(alpha: f64, x: &ComplexVector, y: &mut ComplexVector, flops: &mut FlopCounter) {
    flops.add(4 * x.len() as u64);
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += xi * alpha;
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
