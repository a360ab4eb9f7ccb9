//! Per-user SINR, bit error rate and closed-form precoding complexity.

use crate::solvers::Precoder;
use crate::{Complex64, ComplexVector, Error, Result};

/// Symbols of the closed-form complexity models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopsParams {
    /// Subcarriers per block.
    pub n: u64,
    /// Users.
    pub k: u64,
    /// Kaczmarz system dimension.
    pub n_ts: u64,
    /// Kaczmarz row updates.
    pub t_s: u64,
    /// CG iterations.
    pub t_p: u64,
    /// Stored entries of the sparsified channel.
    pub nnz: u64,
}

impl FlopsParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("n", self.n),
            ("k", self.k),
            ("n_ts", self.n_ts),
            ("t_s", self.t_s),
            ("t_p", self.t_p),
            ("nnz", self.nnz),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Reference per-`N²` complexity coefficients for XL-MIMO-AFDM, in
/// the order ZF, rKA, SwoR-rKA, PCG. Kept for reference; the parameter values
/// that produce them are not known.
pub const REFERENCE_COEFFICIENTS: [(Precoder, u64); 4] = [
    (Precoder::Zf, 32768),
    (Precoder::Rka, 12800),
    (Precoder::SworRka, 16896),
    (Precoder::Pcg, 2816),
];

/// Closed-form operation counts:
///
/// ```text
/// ZF        N²·2K²·N_ts
/// rKA       N_ts·T_s
/// SwoR-rKA  N_ts·T_s + 2·N_ts·K
/// PCG       nnz + nnz·T_p
/// ```
pub fn flops_analytic(method: Precoder, p: &FlopsParams) -> Result<u64> {
    p.validate()?;
    let overflow = || Error::InvalidParameter(format!("{method} operation count overflows u64"));
    let mul = |a: u64, b: u64| a.checked_mul(b).ok_or_else(overflow);
    match method {
        Precoder::Zf => mul(mul(mul(p.n, p.n)?, 2)?, mul(mul(p.k, p.k)?, p.n_ts)?),
        Precoder::Rka => mul(p.n_ts, p.t_s),
        Precoder::SworRka => mul(p.n_ts, p.t_s)?
            .checked_add(mul(mul(2, p.n_ts)?, p.k)?)
            .ok_or_else(overflow),
        Precoder::Pcg => mul(p.nnz, p.t_p)?.checked_add(p.nnz).ok_or_else(overflow),
    }
}

fn check_sinr_inputs(k: usize, channel_rows: &[ComplexVector], precoder_columns: &[ComplexVector], noise_power: f64) -> Result<()> {
    if !(noise_power > 0.0) {
        return Err(Error::InvalidParameter(format!("noise power must be positive, got {noise_power}")));
    }
    if channel_rows.len() != precoder_columns.len() {
        return Err(Error::LengthMismatch(channel_rows.len(), precoder_columns.len()));
    }
    if k >= channel_rows.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            size: channel_rows.len(),
        });
    }
    let dim = channel_rows[k].len();
    for v in channel_rows.iter().chain(precoder_columns) {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    Ok(())
}

/// SINR of user `k` (zero-based) with the interference of every other
/// user's precoder measured on user `k`'s channel:
///
/// ```text
/// |h_k^H f_k|² / (Σ_{j≠k} |h_k^H f_j|² + σ²)
/// ```
pub fn sinr_user(k: usize, channel_rows: &[ComplexVector], precoder_columns: &[ComplexVector], noise_power: f64) -> Result<f64> {
    check_sinr_inputs(k, channel_rows, precoder_columns, noise_power)?;
    let h = &channel_rows[k];
    let gains: Vec<Complex64> = precoder_columns.iter().map(|f| h.dotc(f)).collect();
    sinr_from_gains(k, &gains, noise_power)
}

/// SINR of stream `k` from its received gains `g_j = h_k^H f_j` over all
/// streams `j`.
pub fn sinr_from_gains(k: usize, gains: &[Complex64], noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(Error::InvalidParameter(format!("noise power must be positive, got {noise_power}")));
    }
    if k >= gains.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            size: gains.len(),
        });
    }
    let interference: f64 = gains
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, g)| g.norm_sqr())
        .sum();
    Ok(gains[k].norm_sqr() / (interference + noise_power))
}

/// The alternative reading with cross term `|h_k^H f_i|²` and the other
/// users' own signal powers in the denominator:
///
/// ```text
/// |h_k^H f_k|² / (|h_k^H f_i|² + Σ_{j≠k} |h_j^H f_j|² + σ²)
/// ```
pub fn sinr_user_literal(
    k: usize,
    i: usize,
    channel_rows: &[ComplexVector],
    precoder_columns: &[ComplexVector],
    noise_power: f64,
) -> Result<f64> {
    check_sinr_inputs(k, channel_rows, precoder_columns, noise_power)?;
    if i >= precoder_columns.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            size: precoder_columns.len(),
        });
    }
    let h = &channel_rows[k];
    let signal = h.dotc(&precoder_columns[k]).norm_sqr();
    let cross = h.dotc(&precoder_columns[i]).norm_sqr();
    let others: f64 = (0..channel_rows.len())
        .filter(|j| *j != k)
        .map(|j| channel_rows[j].dotc(&precoder_columns[j]).norm_sqr())
        .sum();
    Ok(signal / (cross + others + noise_power))
}

/// Number of differing positions.
pub fn bit_errors(tx: &[bool], rx: &[bool]) -> Result<u64> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch(tx.len(), rx.len()));
    }
    Ok(tx.iter().zip(rx).filter(|(a, b)| a != b).count() as u64)
}

/// Fraction of differing bits.
pub fn ber(tx: &[bool], rx: &[bool]) -> Result<f64> {
    if tx.is_empty() && rx.is_empty() {
        return Err(Error::Empty);
    }
    Ok(bit_errors(tx, rx)? as f64 / tx.len() as f64)
}
