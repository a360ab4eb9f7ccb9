//! Randomized Kaczmarz baselines.
//!
//! Row `i` of `H·x = b` is projected out by
//!
//! ```text
//! x ← x + (b_i − h_i·x) / ‖h_i‖² · h_i^H
//! ```
//!
//! For `ξ > 0` the iteration runs on the augmented system `[H  √ξ·I]·[x; z] = b`,
//! whose minimum-norm solution has `x = H^H (H H^H + ξI)⁻¹ b`, the
//! regularized ZF transmit vector. With `ξ = 0` the auxiliary `z` stays zero
//! and the update is the plain one.
//!
//! Each row update costs `16·cols + 8` flops. One final residual evaluation
//! (`8·rows·cols`) sets `final_residual_norm` and the convergence flag.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::sparse::FlopCounter;
use crate::{Complex64, ComplexMatrix, ComplexVector, Error, Result};

use super::{check_len, SolveReport, SolverConfig};

struct RowSystem {
    rows: Vec<Vec<Complex64>>,
    /// `‖h_i‖² + ξ`.
    energies: Vec<f64>,
    sqrt_xi: f64,
    cols: usize,
}

impl RowSystem {
    fn new(h: &ComplexMatrix, b: &ComplexVector, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        check_len(h.nrows(), b.len())?;
        if h.nrows() == 0 || h.ncols() == 0 {
            return Err(Error::Empty);
        }
        let rows: Vec<Vec<Complex64>> = h.row_iter().map(|r| r.iter().copied().collect()).collect();
        let energies: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>() + cfg.regularization)
            .collect();
        if let Some(i) = energies.iter().position(|e| !(*e > 0.0)) {
            return Err(Error::ZeroRow(i));
        }
        Ok(Self {
            rows,
            energies,
            sqrt_xi: cfg.regularization.sqrt(),
            cols: h.ncols(),
        })
    }

    fn update(&self, i: usize, b: &ComplexVector, x: &mut ComplexVector, z: &mut [Complex64], flops: &mut FlopCounter) {
        let row = &self.rows[i];
        let mut inner = Complex64::new(0.0, 0.0);
        for (h, xv) in row.iter().zip(x.iter()) {
            inner += h * xv;
        }
        let residual = b[i] - inner - z[i] * self.sqrt_xi;
        let step = residual / self.energies[i];
        for (xv, h) in x.iter_mut().zip(row) {
            *xv += step * h.conj();
        }
        z[i] += step * self.sqrt_xi;
        flops.add(16 * self.cols as u64 + 8);
    }

    fn finish(
        &self,
        b: &ComplexVector,
        x: ComplexVector,
        z: &[Complex64],
        iterations: usize,
        cfg: &SolverConfig,
        mut flops: FlopCounter,
    ) -> SolveReport {
        flops.add(8 * (self.rows.len() * self.cols) as u64);
        let residual = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let inner: Complex64 = row.iter().zip(x.iter()).map(|(h, v)| h * v).sum();
                (b[i] - inner - z[i] * self.sqrt_xi).norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        SolveReport {
            solution: x,
            iterations,
            final_residual_norm: residual,
            flops: flops.get(),
            converged: residual < cfg.tolerance,
        }
    }
}

/// Randomized Kaczmarz with rows drawn i.i.d. with probability `∝ ‖h_i‖² + ξ`.
/// Runs exactly `cfg.max_iters` row updates from `x = 0`.
pub fn rka_solve<R: Rng + ?Sized>(
    h: &ComplexMatrix,
    b: &ComplexVector,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<SolveReport> {
    let system = RowSystem::new(h, b, cfg)?;
    let sampler = WeightedIndex::new(&system.energies).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut x = ComplexVector::zeros(system.cols);
    let mut z = vec![Complex64::new(0.0, 0.0); system.rows.len()];
    let mut flops = FlopCounter::new();
    for _ in 0..cfg.max_iters {
        let i = sampler.sample(rng);
        system.update(i, b, &mut x, &mut z, &mut flops);
    }
    Ok(system.finish(b, x, &z, cfg.max_iters, cfg, flops))
}

/// Kaczmarz sweeping a fresh random permutation of the rows every epoch.
/// Runs exactly `cfg.max_iters` row updates; the last epoch may be partial.
pub fn swor_rka_solve<R: Rng + ?Sized>(
    h: &ComplexMatrix,
    b: &ComplexVector,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<SolveReport> {
    swor_rka_solve_audited(h, b, cfg, rng, |_, _| {})
}

/// [`swor_rka_solve`], calling `audit(epoch, order)` with each epoch's row
/// order before it is swept. Shuffling charges `2·rows` flops per epoch.
pub fn swor_rka_solve_audited<R, F>(
    h: &ComplexMatrix,
    b: &ComplexVector,
    cfg: &SolverConfig,
    rng: &mut R,
    mut audit: F,
) -> Result<SolveReport>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &[usize]),
{
    let system = RowSystem::new(h, b, cfg)?;
    let n_rows = system.rows.len();
    let mut x = ComplexVector::zeros(system.cols);
    let mut z = vec![Complex64::new(0.0, 0.0); n_rows];
    let mut flops = FlopCounter::new();
    let mut order: Vec<usize> = (0..n_rows).collect();
    let mut done = 0;
    let mut epoch = 0;
    while done < cfg.max_iters {
        order.shuffle(rng);
        flops.add(2 * n_rows as u64);
        audit(epoch, &order);
        for &i in order.iter().take(cfg.max_iters - done) {
            system.update(i, b, &mut x, &mut z, &mut flops);
            done += 1;
        }
        epoch += 1;
    }
    Ok(system.finish(b, x, &z, cfg.max_iters, cfg, flops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{zf_precode, Preconditioner};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(iters: usize, xi: f64) -> SolverConfig {
        SolverConfig::new(iters, 1e-9, xi, Preconditioner::None).unwrap()
    }

    /// Diagonally dominant so the 8×8 systems are well conditioned.
    fn well_conditioned(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| {
            let noise = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 0.3;
            if i == j {
                noise + c(2.0, 0.0)
            } else {
                noise
            }
        })
    }

    fn random_vector(n: usize, rng: &mut impl Rng) -> ComplexVector {
        ComplexVector::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn scalar_system_one_update() {
        let h = ComplexMatrix::from_element(1, 1, c(2.0, 0.0));
        let b = ComplexVector::from_element(1, c(4.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = rka_solve(&h, &b, &cfg(1, 0.0), &mut rng).unwrap();
        assert_eq!(r.solution[0], c(2.0, 0.0));
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn identity_solved_once_every_row_is_touched() {
        let n = 6;
        let h = ComplexMatrix::identity(n, n);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_vector(n, &mut rng);
        let swor = swor_rka_solve(&h, &b, &cfg(n, 0.0), &mut rng).unwrap();
        assert_eq!(swor.solution, b);

        // rKA with replacement: exact once all distinct rows have been drawn.
        let mut draws = ChaCha8Rng::seed_from_u64(9);
        let sampler = WeightedIndex::new(vec![1.0; n]).unwrap();
        let mut seen = vec![false; n];
        let mut needed = 0;
        while seen.iter().any(|s| !s) {
            seen[sampler.sample(&mut draws)] = true;
            needed += 1;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = rka_solve(&h, &b, &cfg(needed, 0.0), &mut rng).unwrap();
        assert_eq!(r.solution, b);
    }

    #[test]
    fn rka_converges_on_well_conditioned_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(20240801);
        let h = well_conditioned(8, &mut rng);
        let b = random_vector(8, &mut rng);
        let direct = h.clone().lu().solve(&b).unwrap();
        let r = rka_solve(&h, &b, &cfg(5000, 0.0), &mut rng).unwrap();
        assert!((r.solution - &direct).norm() / direct.norm() < 1e-3);
    }

    #[test]
    fn swor_converges_within_twenty_epochs() {
        let mut rng = ChaCha8Rng::seed_from_u64(20240802);
        let h = well_conditioned(8, &mut rng);
        let b = random_vector(8, &mut rng);
        let direct = h.clone().lu().solve(&b).unwrap();
        let r = swor_rka_solve(&h, &b, &cfg(20 * 8, 0.0), &mut rng).unwrap();
        assert!((r.solution - &direct).norm() / direct.norm() < 1e-3);
    }

    #[test]
    fn every_epoch_is_a_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = well_conditioned(7, &mut rng);
        let b = random_vector(7, &mut rng);
        let mut epochs = 0;
        swor_rka_solve_audited(&h, &b, &cfg(7 * 5, 0.0), &mut rng, |e, order| {
            assert_eq!(e, epochs);
            let mut sorted = order.to_vec();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..7).collect::<Vec<_>>());
            epochs += 1;
        })
        .unwrap();
        assert_eq!(epochs, 5);
    }

    #[test]
    fn regularized_limit_is_regularized_zf() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let h = ComplexMatrix::from_fn(4, 8, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let b = random_vector(4, &mut rng);
        let zf = zf_precode(&h, &b, 0.05).unwrap();
        let swor = swor_rka_solve(&h, &b, &cfg(4 * 4000, 0.05), &mut rng).unwrap();
        let rka = rka_solve(&h, &b, &cfg(16000, 0.05), &mut rng).unwrap();
        assert!((swor.solution - &zf).norm() / zf.norm() < 1e-6);
        assert!((rka.solution - &zf).norm() / zf.norm() < 1e-6);
    }

    #[test]
    fn flop_accounting() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let h = well_conditioned(5, &mut rng);
        let b = random_vector(5, &mut rng);
        let r = rka_solve(&h, &b, &cfg(12, 0.0), &mut rng).unwrap();
        assert_eq!(r.flops, 12 * (16 * 5 + 8) + 8 * 25);
        let s = swor_rka_solve(&h, &b, &cfg(12, 0.0), &mut rng).unwrap();
        assert_eq!(s.flops - r.flops, 3 * 2 * 5);
    }

    #[test]
    fn zero_row_rejected() {
        let mut h = ComplexMatrix::identity(3, 3);
        h[(1, 1)] = c(0.0, 0.0);
        let b = ComplexVector::zeros(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(rka_solve(&h, &b, &cfg(3, 0.0), &mut rng), Err(Error::ZeroRow(1)));
        assert!(rka_solve(&h, &b, &cfg(3, 0.1), &mut rng).is_ok());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = well_conditioned(6, &mut rng);
        let b = random_vector(6, &mut rng);
        let run = |seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            (
                rka_solve(&h, &b, &cfg(100, 0.01), &mut r).unwrap(),
                swor_rka_solve(&h, &b, &cfg(100, 0.01), &mut r).unwrap(),
            )
        };
        assert_eq!(run(77), run(77));
    }
}
