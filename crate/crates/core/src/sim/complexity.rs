//! Complexity-versus-users sweep.
//!
//! For each `K` in `[complexity].users` the closed-form count of every
//! configured precoder is reported. With `measure = true` the iterative
//! precoders also run once on a drawn `K`-user channel at the first SNR of
//! the grid, and their executed flops appear as `<method>-measured` rows.

use rand::Rng;

use crate::channel::build_mimo_matrix;
use crate::metrics::flops_analytic;
use crate::qam::{qam_modulate, ModulationAlphabet};
use crate::solvers::Precoder;

use super::ber::{draw_channel, PrecodingContext};
use super::output::SweepRow;
use super::seed::{trial_rng, Purpose};
use super::{SimConfig, SimError};

fn base_row(cfg: &SimConfig, method: String, users: usize) -> SweepRow {
    SweepRow {
        method,
        waveform: cfg.system.waveform,
        snr_db: None,
        users,
        trials: 1,
        aborted: 0,
        bits: 0,
        bit_errors: 0,
        total_iterations: None,
        total_flops: 0,
        sinr_sum: None,
    }
}

fn measure(cfg: &SimConfig, point: usize, users: usize, method: Precoder) -> Result<SweepRow, SimError> {
    let params = cfg.afdm_params()?;
    let n = params.n;
    let n_r = users * cfg.system.rx_per_user;
    let snr_db = cfg.simulation.snr_db[0];
    let seed = cfg.simulation.seed;
    let mut rng = trial_rng(seed, point, 0, Purpose::ComplexityChannel);
    let spec = draw_channel(cfg, n_r, &mut rng)?;
    let alphabet = ModulationAlphabet::new(cfg.system.modulation)?;
    let bits: Vec<bool> = (0..n * n_r * alphabet.bits_per_symbol()).map(|_| rng.random()).collect();
    let b = qam_modulate(&bits, &alphabet)?;
    let h = build_mimo_matrix(&spec, &params)?;
    let mut ctx = PrecodingContext::new(cfg, &h, snr_db)?;
    let mut solver_rng = trial_rng(seed, point, 0, Purpose::ComplexitySolver);
    let pre = ctx.precode(method, &b, &mut solver_rng)?;
    Ok(SweepRow {
        snr_db: Some(snr_db),
        total_iterations: pre.iterations,
        total_flops: pre.flops,
        ..base_row(cfg, format!("{method}-measured"), users)
    })
}

/// Rows ordered by `K`, then method; each analytic row is followed by its
/// measured counterpart when measuring.
pub fn run_complexity_sweep(cfg: &SimConfig) -> Result<Vec<SweepRow>, SimError> {
    cfg.validate()?;
    let cx = cfg
        .complexity
        .as_ref()
        .ok_or_else(|| SimError::Config("missing [complexity] section".into()))?;
    let mut methods = cfg.simulation.precoders.clone();
    methods.sort();
    let mut rows = Vec::new();
    for (point, &k) in cx.users.iter().enumerate() {
        let params = cfg.flops_params(k);
        for &method in &methods {
            rows.push(SweepRow {
                total_flops: flops_analytic(method, &params)?,
                ..base_row(cfg, method.label().to_string(), k)
            });
            if cx.measure && method != Precoder::Zf {
                rows.push(measure(cfg, point, k, method)?);
            }
        }
    }
    Ok(rows)
}
