//! BER-versus-SNR Monte-Carlo sweep.
//!
//! One trial at SNR `γ` (dB), noise power `σ² = 10^(-γ/10)`:
//!
//! 1. draw delays, Dopplers and per-link gains, and `N·N_r` QAM symbols `b`
//!    (user `k` owns receive antennas `k·N_k .. (k+1)·N_k`);
//! 2. build the DAFT-domain MIMO channel `H` (the precoder's CSI) and its
//!    time-domain counterpart;
//! 3. each precoder computes `x` with `H·x ≈ b`, scaled by `β` so the frame
//!    carries `N·N_r` units of energy;
//! 4. every transmit antenna sends `A·x_t`, the time-domain channel and
//!    `CN(0, σ²)` noise act, and every receive antenna computes `A^H·y_r / β`
//!    and makes hard QAM decisions.
//!
//! All precoders of a trial see the same channel, data and noise.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::afdm::{build_daft_matrix, AfdmParams};
use crate::channel::{
    apply_channel, build_mimo_matrix, build_time_domain_mimo_matrix, rayleigh_gains, ChannelProfile,
    MimoChannelSpec, PathSpec,
};
use crate::metrics::{bit_errors, sinr_from_gains};
use crate::qam::{qam_demodulate, qam_modulate, ModulationAlphabet};
use crate::solvers::{pcg_precode, rka_solve, swor_rka_solve, zf_flops, Precoder, SolverConfig, ZfPrecoder};
use crate::sparse::{sparsify, SparseChannelMatrix};
use crate::{Complex64, ComplexMatrix, ComplexVector, Error};

use super::config::{DopplerModel, GainModel, SimConfig};
use super::output::SweepRow;
use super::seed::{trial_rng, Purpose};
use super::SimError;

/// `10^(-snr_db/10)`.
pub fn noise_power(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Draws one MIMO channel: delays, then Dopplers, then the gains of every
/// link in row-major `(r, t)` order.
pub fn draw_channel(cfg: &SimConfig, n_r: usize, rng: &mut impl Rng) -> Result<MimoChannelSpec, SimError> {
    let ch = &cfg.channel;
    let p = ch.paths;
    let delays: Vec<usize> = match &ch.delays {
        Some(d) => d.clone(),
        None => (0..p).map(|_| rng.random_range(0..=ch.max_delay)).collect(),
    };
    let dopplers: Vec<f64> = match &ch.dopplers {
        Some(v) => v.clone(),
        None => (0..p)
            .map(|_| match ch.doppler_model {
                DopplerModel::Fixed => ch.max_doppler,
                DopplerModel::Uniform => ch.max_doppler * (2.0 * rng.random::<f64>() - 1.0),
                DopplerModel::Jakes => ch.max_doppler * (std::f64::consts::TAU * rng.random::<f64>()).cos(),
            })
            .collect(),
    };
    let n_t = cfg.system.tx_antennas;
    let mut links = Vec::with_capacity(n_r * n_t);
    for _ in 0..n_r * n_t {
        let gains = match ch.gain_model {
            GainModel::Rayleigh => rayleigh_gains(p, rng),
            GainModel::Equal => vec![Complex64::new(1.0 / (p as f64).sqrt(), 0.0); p],
        };
        let paths = delays
            .iter()
            .zip(&dopplers)
            .zip(gains)
            .map(|((&l, &nu), g)| PathSpec::new(g, l, nu))
            .collect::<crate::Result<Vec<_>>>()?;
        links.push(ChannelProfile::new(paths, ch.max_delay, ch.max_doppler)?);
    }
    Ok(MimoChannelSpec::new(n_t, n_r, links)?)
}

/// Transmit vector of one precoder with its cost.
#[derive(Debug, Clone)]
pub(crate) struct Precoded {
    pub x: ComplexVector,
    pub iterations: Option<u64>,
    pub flops: u64,
    pub converged: bool,
}

/// Lazily built per-trial precoding state shared by several methods.
pub(crate) struct PrecodingContext<'a> {
    pub h: &'a ComplexMatrix,
    pub noise_power: f64,
    pub sparsify_noise_power: f64,
    pub threshold_db: f64,
    pub cg: SolverConfig,
    pub kaczmarz: SolverConfig,
    zf: Option<ZfPrecoder>,
    sparse: Option<SparseChannelMatrix>,
    sparse_gram: Option<(ComplexMatrix, ZfPrecoder)>,
}

impl<'a> PrecodingContext<'a> {
    pub fn new(cfg: &SimConfig, h: &'a ComplexMatrix, snr_db: f64) -> Result<Self, SimError> {
        let sigma2 = noise_power(snr_db);
        Ok(Self {
            h,
            noise_power: sigma2,
            sparsify_noise_power: cfg.simulation.sparsify_snr_db.map_or(sigma2, noise_power),
            threshold_db: cfg.simulation.threshold_db,
            cg: cfg.solver.cg(sigma2)?,
            kaczmarz: cfg.solver.kaczmarz(sigma2)?,
            zf: None,
            sparse: None,
            sparse_gram: None,
        })
    }

    fn zf(&mut self) -> Result<&ZfPrecoder, SimError> {
        if self.zf.is_none() {
            self.zf = Some(ZfPrecoder::new(self.h, self.cg.regularization)?);
        }
        Ok(self.zf.as_ref().expect("just built"))
    }

    pub fn sparse(&mut self) -> Result<&SparseChannelMatrix, SimError> {
        if self.sparse.is_none() {
            self.sparse = Some(sparsify(self.h, self.threshold_db, self.sparsify_noise_power)?);
        }
        Ok(self.sparse.as_ref().expect("just built"))
    }

    pub fn precode(&mut self, method: Precoder, b: &ComplexVector, rng: &mut ChaCha8Rng) -> Result<Precoded, SimError> {
        let (rows, cols) = self.h.shape();
        Ok(match method {
            Precoder::Zf => Precoded {
                x: self.zf()?.precode(b)?,
                iterations: None,
                flops: zf_flops(rows, cols),
                converged: true,
            },
            Precoder::Pcg => {
                let cfg = self.cg;
                let r = pcg_precode(self.sparse()?, b, &cfg)?;
                Precoded {
                    x: r.solution,
                    iterations: Some(r.iterations as u64),
                    flops: r.flops,
                    converged: r.converged,
                }
            }
            Precoder::Rka | Precoder::SworRka => {
                let r = if method == Precoder::Rka {
                    rka_solve(self.h, b, &self.kaczmarz, rng)?
                } else {
                    swor_rka_solve(self.h, b, &self.kaczmarz, rng)?
                };
                Precoded {
                    x: r.solution,
                    iterations: Some(r.iterations as u64),
                    flops: r.flops,
                    converged: r.converged,
                }
            }
        })
    }

    /// Gains `h_u·w_j` of every stream `j` at receive row `u`, where `W` is
    /// the linear map the method realizes at convergence. `None` for the
    /// Kaczmarz methods, whose map depends on the sampled row sequence.
    fn stream_gains(&mut self, method: Precoder, u: usize) -> Result<Option<Vec<Complex64>>, SimError> {
        let rows = self.h.nrows();
        match method {
            Precoder::Zf => {
                // h_u·H^H·G⁻¹ = e_u^T (G - ξI) G⁻¹ = e_u^T - ξ·(G⁻¹)_{u,:}
                let xi = self.cg.regularization;
                let mut e = ComplexVector::zeros(rows);
                e[u] = Complex64::new(1.0, 0.0);
                let v = self.zf()?.gram_solve(&e)?;
                Ok(Some(
                    (0..rows)
                        .map(|j| e[j] - v[j].conj() * xi)
                        .collect(),
                ))
            }
            Precoder::Pcg => {
                // h_u·M⁻¹·S^H = h_u·S^H·(S S^H + ξI)⁻¹ with M = S^H S + ξI; the
                // magnitudes are those of (S S^H + ξI)⁻¹·S·h_u^H.
                if self.sparse_gram.is_none() {
                    let dense = self.sparse()?.to_dense();
                    let gram = ZfPrecoder::new(&dense, self.cg.regularization)?;
                    self.sparse_gram = Some((dense, gram));
                }
                let (dense, gram) = self.sparse_gram.as_ref().expect("just built");
                let v = gram.gram_solve(&(dense * self.h.row(u).adjoint()))?;
                Ok(Some(v.iter().map(|g| g.conj()).collect()))
            }
            Precoder::Rka | Precoder::SworRka => Ok(None),
        }
    }
}

/// Per-method result of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub method: Precoder,
    pub bits: u64,
    pub bit_errors: u64,
    pub iterations: Option<u64>,
    pub flops: u64,
    /// Sum of linear per-user SINRs and the user count.
    pub sinr_sum: Option<(f64, u64)>,
    /// The solver missed its tolerance and the run is strict.
    pub aborted: bool,
}

/// All outcomes of one `(snr point, trial)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub snr_index: usize,
    pub trial: u64,
    pub outcomes: Vec<TrialOutcome>,
}

/// Trial-invariant state.
struct Setup {
    params: AfdmParams,
    daft: ComplexMatrix,
    alphabet: ModulationAlphabet,
}

impl Setup {
    fn new(cfg: &SimConfig) -> Result<Self, SimError> {
        let params = cfg.afdm_params()?;
        Ok(Self {
            daft: build_daft_matrix(&params)?,
            params,
            alphabet: ModulationAlphabet::new(cfg.system.modulation)?,
        })
    }
}

/// Runs trial `trial` of SNR point `snr_index`.
pub fn run_ber_trial(cfg: &SimConfig, snr_index: usize, trial: u64) -> Result<TrialRecord, SimError> {
    let setup = Setup::new(cfg)?;
    trial_with(cfg, &setup, snr_index, trial)
}

fn trial_with(cfg: &SimConfig, setup: &Setup, snr_index: usize, trial: u64) -> Result<TrialRecord, SimError> {
    let seed = cfg.simulation.seed;
    let snr_db = cfg.simulation.snr_db[snr_index];
    let n = setup.params.n;
    let n_t = cfg.system.tx_antennas;
    let n_r = cfg.rx_antennas();
    let bps = setup.alphabet.bits_per_symbol();

    let mut rng = trial_rng(seed, snr_index, trial, Purpose::Channel);
    let spec = draw_channel(cfg, n_r, &mut rng)?;
    let bits: Vec<bool> = (0..n * n_r * bps).map(|_| rng.random()).collect();
    let b = qam_modulate(&bits, &setup.alphabet)?;
    let h = build_mimo_matrix(&spec, &setup.params)?;
    let m = build_time_domain_mimo_matrix(&spec, &setup.params)?;
    let noise_rng = trial_rng(seed, snr_index, trial, Purpose::Noise);
    let solver_rng = trial_rng(seed, snr_index, trial, Purpose::Solver);

    let mut ctx = PrecodingContext::new(cfg, &h, snr_db)?;
    let mut outcomes = Vec::with_capacity(cfg.simulation.precoders.len());
    for &method in &cfg.simulation.precoders {
        let pre = ctx.precode(method, &b, &mut solver_rng.clone())?;
        if cfg.simulation.strict && !pre.converged {
            outcomes.push(TrialOutcome {
                method,
                bits: 0,
                bit_errors: 0,
                iterations: pre.iterations,
                flops: pre.flops,
                sinr_sum: None,
                aborted: true,
            });
            continue;
        }
        let energy = pre.x.norm_squared();
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::InvalidParameter(format!("{method} produced a transmit vector of energy {energy}")).into());
        }
        let beta = ((n * n_r) as f64 / energy).sqrt();

        let mut s = ComplexVector::zeros(n * n_t);
        for t in 0..n_t {
            let xt = pre.x.rows(t * n, n);
            s.rows_mut(t * n, n).copy_from(&(&setup.daft * xt * Complex64::new(beta, 0.0)));
        }
        let y = apply_channel(&m, &s, ctx.noise_power, &mut noise_rng.clone())?;
        let mut errors = 0;
        for r in 0..n_r {
            let yr = setup.daft.ad_mul(&y.rows(r * n, n)) / Complex64::new(beta, 0.0);
            let rx = qam_demodulate(&yr, &setup.alphabet);
            errors += bit_errors(&bits[r * n * bps..(r + 1) * n * bps], &rx)?;
        }

        let mut sinr_sum = None;
        for k in 0..cfg.system.users {
            let u = k * cfg.system.rx_per_user * n;
            if let Some(gains) = ctx.stream_gains(method, u)? {
                let scaled: Vec<Complex64> = gains.iter().map(|g| g * beta).collect();
                let sinr = sinr_from_gains(u, &scaled, ctx.noise_power)?;
                let (sum, count) = sinr_sum.unwrap_or((0.0, 0));
                sinr_sum = Some((sum + sinr, count + 1));
            }
        }

        outcomes.push(TrialOutcome {
            method,
            bits: bits.len() as u64,
            bit_errors: errors,
            iterations: pre.iterations,
            flops: pre.flops,
            sinr_sum,
            aborted: false,
        });
    }
    Ok(TrialRecord {
        snr_index,
        trial,
        outcomes,
    })
}

/// Every trial of the sweep, in `(snr point, trial)` order. Trials run in
/// parallel on the current rayon pool; the result does not depend on it.
pub fn run_ber_trials(cfg: &SimConfig) -> Result<Vec<TrialRecord>, SimError> {
    cfg.validate()?;
    let setup = Setup::new(cfg)?;
    let jobs: Vec<(usize, u64)> = (0..cfg.simulation.snr_db.len())
        .flat_map(|si| (0..cfg.simulation.trials).map(move |t| (si, t)))
        .collect();
    let results: Vec<Result<TrialRecord, SimError>> = jobs
        .par_iter()
        .map(|&(si, t)| trial_with(cfg, &setup, si, t))
        .collect();
    results.into_iter().collect()
}

/// Aggregates trial records into one row per `(method, snr point)`, sorted
/// by method and then SNR.
pub fn aggregate(cfg: &SimConfig, records: &[TrialRecord]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for &method in &cfg.simulation.precoders {
        for (si, &snr_db) in cfg.simulation.snr_db.iter().enumerate() {
            let mut row = SweepRow {
                method: method.label().to_string(),
                waveform: cfg.system.waveform,
                snr_db: Some(snr_db),
                users: cfg.system.users,
                trials: 0,
                aborted: 0,
                bits: 0,
                bit_errors: 0,
                total_iterations: None,
                total_flops: 0,
                sinr_sum: None,
            };
            let outcomes = records
                .iter()
                .filter(|r| r.snr_index == si)
                .flat_map(|r| r.outcomes.iter().filter(|o| o.method == method));
            for o in outcomes {
                if o.aborted {
                    row.aborted += 1;
                    continue;
                }
                row.trials += 1;
                row.bits += o.bits;
                row.bit_errors += o.bit_errors;
                row.total_flops += o.flops;
                if let Some(it) = o.iterations {
                    row.total_iterations = Some(row.total_iterations.unwrap_or(0) + it);
                }
                if let Some((s, c)) = o.sinr_sum {
                    let (acc, n) = row.sinr_sum.unwrap_or((0.0, 0));
                    row.sinr_sum = Some((acc + s, n + c));
                }
            }
            rows.push((method, si, row));
        }
    }
    rows.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(cfg.simulation.snr_db[a.1].total_cmp(&cfg.simulation.snr_db[b.1]))
            .then(a.1.cmp(&b.1))
    });
    rows.into_iter().map(|(_, _, r)| r).collect()
}

/// BER, iteration, flop and SINR statistics per `(method, SNR)`.
pub fn run_ber_sweep(cfg: &SimConfig) -> Result<Vec<SweepRow>, SimError> {
    let records = run_ber_trials(cfg)?;
    Ok(aggregate(cfg, &records))
}
