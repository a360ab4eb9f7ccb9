//! Conjugate gradient with optional Jacobi preconditioning.
//!
//! ```text
//! r = b - A·x0,  z = M⁻¹r,  p = z
//! repeat up to T_p times:
//!     α = r^H z / p^H A p
//!     x += α p
//!     r -= α A p
//!     stop if ‖r‖ < err
//!     z = M⁻¹r
//!     p = z + (r_new^H z_new / r^H z) p
//! ```
//!
//! With `M = I` this is the textbook two-term recurrence. It produces the
//! same iterates as conjugating each new residual against every previous
//! direction in the `A` inner product, at a fraction of the cost.

use crate::sparse::{FlopCounter, SparseChannelMatrix};
use crate::{Complex64, ComplexVector, Error, Result};

use super::{axpy_real, check_len, dotc, norm_sqr, LinearOperator, Preconditioner, SolveReport, SolverConfig};

/// `S^H S + ξI`, applied as two sparse products without forming `S^H S`.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedNormalOperator<'a> {
    matrix: &'a SparseChannelMatrix,
    regularization: f64,
}

impl<'a> RegularizedNormalOperator<'a> {
    pub fn new(matrix: &'a SparseChannelMatrix, regularization: f64) -> Self {
        Self { matrix, regularization }
    }
}

impl LinearOperator for RegularizedNormalOperator<'_> {
    fn shape(&self) -> (usize, usize) {
        (self.matrix.cols(), self.matrix.cols())
    }

    fn apply(&self, x: &ComplexVector, flops: &mut FlopCounter) -> ComplexVector {
        let sx = self.matrix.spmv(x, flops).expect("dimension checked by the solver");
        let mut y = self.matrix.adjoint_spmv(&sx, flops).expect("rows match");
        if self.regularization != 0.0 {
            axpy_real(self.regularization, x, &mut y, flops);
        }
        y
    }

    fn diagonal(&self) -> Vec<f64> {
        self.matrix
            .column_norms_sqr()
            .into_iter()
            .map(|d| d + self.regularization)
            .collect()
    }

    fn diagonal_flops(&self) -> u64 {
        4 * self.matrix.nnz() as u64
    }
}

/// Plain conjugate gradient; `cfg.preconditioner` is ignored.
pub fn cg_solve<A: LinearOperator + ?Sized>(
    a: &A,
    b: &ComplexVector,
    cfg: &SolverConfig,
    x0: &ComplexVector,
) -> Result<SolveReport> {
    conjugate_gradient(a, b, cfg, x0, Preconditioner::None, FlopCounter::new())
}

/// Conjugate gradient preconditioned as `cfg.preconditioner` says.
pub fn pcg_solve<A: LinearOperator + ?Sized>(
    a: &A,
    b: &ComplexVector,
    cfg: &SolverConfig,
    x0: &ComplexVector,
) -> Result<SolveReport> {
    conjugate_gradient(a, b, cfg, x0, cfg.preconditioner, FlopCounter::new())
}

/// Transmit vector solving `(S^H S + ξI)·x = S^H·b` with `ξ = cfg.regularization`.
///
/// Flops: `8·nnz` for `S^H b` (plus `4·nnz` for the Jacobi diagonal), then
/// `16·nnz` per iteration for the two sparse products, plus `O(cols)` vector
/// work per iteration.
pub fn pcg_precode(s: &SparseChannelMatrix, b: &ComplexVector, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    check_len(s.rows(), b.len())?;
    let mut flops = FlopCounter::new();
    let rhs = s.adjoint_spmv(b, &mut flops)?;
    let op = RegularizedNormalOperator::new(s, cfg.regularization);
    let x0 = ComplexVector::zeros(s.cols());
    conjugate_gradient(&op, &rhs, cfg, &x0, cfg.preconditioner, flops)
}

fn precondition(r: &ComplexVector, inv_diag: &[f64], flops: &mut FlopCounter) -> ComplexVector {
    flops.add(2 * r.len() as u64);
    ComplexVector::from_iterator(r.len(), r.iter().zip(inv_diag).map(|(v, d)| v * *d))
}

fn conjugate_gradient<A: LinearOperator + ?Sized>(
    a: &A,
    b: &ComplexVector,
    cfg: &SolverConfig,
    x0: &ComplexVector,
    preconditioner: Preconditioner,
    mut flops: FlopCounter,
) -> Result<SolveReport> {
    cfg.validate()?;
    let (rows, cols) = a.shape();
    check_len(rows, cols)?;
    check_len(rows, b.len())?;
    check_len(rows, x0.len())?;
    let n = rows as u64;

    let inv_diag = match preconditioner {
        Preconditioner::None => None,
        Preconditioner::Diagonal => {
            flops.add(a.diagonal_flops());
            let diag = a.diagonal();
            if let Some((index, &value)) = diag.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
                return Err(Error::NonPositiveDiagonal { index, value });
            }
            Some(diag.iter().map(|d| 1.0 / d).collect::<Vec<_>>())
        }
    };

    let mut x = x0.clone();
    let zero = Complex64::new(0.0, 0.0);
    let mut r = if x0.iter().all(|v| *v == zero) {
        b.clone()
    } else {
        let ax = a.apply(&x, &mut flops);
        flops.add(2 * n);
        b - ax
    };
    let mut rr = norm_sqr(&r, &mut flops);
    if rr.sqrt() < cfg.tolerance {
        return Ok(SolveReport {
            solution: x,
            iterations: 0,
            final_residual_norm: rr.sqrt(),
            flops: flops.get(),
            converged: true,
        });
    }

    let (mut p, mut rz) = match &inv_diag {
        None => (r.clone(), rr),
        Some(d) => {
            let z = precondition(&r, d, &mut flops);
            let rz = dotc(&r, &z, &mut flops).re;
            (z, rz)
        }
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        let ap = a.apply(&p, &mut flops);
        let curvature = dotc(&p, &ap, &mut flops).re;
        if !(curvature > 0.0) {
            return Err(Error::NonPositiveCurvature(curvature));
        }
        let alpha = rz / curvature;
        axpy_real(alpha, &p, &mut x, &mut flops);
        axpy_real(-alpha, &ap, &mut r, &mut flops);
        rr = norm_sqr(&r, &mut flops);
        iterations += 1;
        if rr.sqrt() < cfg.tolerance {
            converged = true;
            break;
        }
        let (z, rz_new) = match &inv_diag {
            None => (None, rr),
            Some(d) => {
                let z = precondition(&r, d, &mut flops);
                let rz_new = dotc(&r, &z, &mut flops).re;
                (Some(z), rz_new)
            }
        };
        let beta = rz_new / rz;
        flops.add(4 * n);
        let z = z.as_ref().unwrap_or(&r);
        for (pi, zi) in p.iter_mut().zip(z.iter()) {
            *pi = zi + *pi * beta;
        }
        rz = rz_new;
    }

    Ok(SolveReport {
        solution: x,
        iterations,
        final_residual_norm: rr.sqrt(),
        flops: flops.get(),
        converged,
    })
}
