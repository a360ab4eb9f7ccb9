use std::io::{self, Write};

use crate::io::format_float;

use super::config::Waveform;

pub const CSV_HEADER: &str = "method,waveform,snr_db,K,ber,mean_iters,mean_flops,mean_sinr_db";

/// One aggregated sweep record. Totals are kept as integers so that means
/// can be recomputed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: String,
    pub waveform: Waveform,
    pub snr_db: Option<f64>,
    /// `K`.
    pub users: usize,
    /// Trials that contributed (aborted ones excluded).
    pub trials: u64,
    /// Trials dropped because a solver missed its tolerance in strict mode.
    pub aborted: u64,
    pub bits: u64,
    pub bit_errors: u64,
    /// `None` for methods without iterations.
    pub total_iterations: Option<u64>,
    pub total_flops: u64,
    /// Sum of linear per-user SINRs and the number of terms.
    pub sinr_sum: Option<(f64, u64)>,
}

impl SweepRow {
    pub fn ber(&self) -> Option<f64> {
        (self.bits > 0).then(|| self.bit_errors as f64 / self.bits as f64)
    }

    pub fn mean_iterations(&self) -> Option<f64> {
        let total = self.total_iterations?;
        (self.trials > 0).then(|| total as f64 / self.trials as f64)
    }

    pub fn mean_flops(&self) -> Option<f64> {
        (self.trials > 0).then(|| self.total_flops as f64 / self.trials as f64)
    }

    /// `10·log10` of the mean linear SINR.
    pub fn mean_sinr_db(&self) -> Option<f64> {
        let (sum, count) = self.sinr_sum?;
        (count > 0).then(|| 10.0 * (sum / count as f64).log10())
    }

    /// Binomial standard error of the BER estimate, `sqrt(p(1-p)/bits)`.
    pub fn ber_std_error(&self) -> Option<f64> {
        let p = self.ber()?;
        Some((p * (1.0 - p) / self.bits as f64).sqrt())
    }

    fn csv_line(&self) -> String {
        let f = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            self.waveform,
            f(self.snr_db),
            self.users,
            f(self.ber()),
            f(self.mean_iterations()),
            f(self.mean_flops()),
            f(self.mean_sinr_db()),
        )
    }
}

/// Header plus one LF-terminated line per row; empty fields where a value
/// does not apply.
pub fn write_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    out.flush()
}
