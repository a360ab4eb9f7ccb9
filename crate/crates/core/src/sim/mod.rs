//! Monte-Carlo experiments: BER-versus-SNR and complexity-versus-users
//! sweeps, their configuration and their CSV output.
//!
//! Every trial draws from its own random streams, derived from the master
//! seed and the trial's indices, so results are identical for any thread
//! count.

mod ber;
mod complexity;
mod config;
mod output;
mod seed;

pub use ber::{aggregate, draw_channel, noise_power, run_ber_sweep, run_ber_trial, run_ber_trials, TrialOutcome, TrialRecord};
pub use complexity::run_complexity_sweep;
pub use config::{
    ChannelConfig, ComplexityConfig, DopplerModel, GainModel, Regularization, SimConfig, SimulationConfig,
    SolverSettings, SystemConfig, Waveform,
};
pub use output::{write_csv, SweepRow, CSV_HEADER};
pub use seed::{trial_rng, Purpose};

/// Failures of a simulation run, grouped by process exit code.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] crate::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl SimError {
    /// 2 for configuration, 3 for numerical and 4 for I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 4,
        }
    }
}
