//! TOML experiment configuration.
//!
//! ```toml
//! [system]
//! subcarriers = 16
//! tx_antennas = 8
//! users = 4
//! rx_per_user = 1
//! modulation = 4
//! waveform = "afdm"          # or "ofdm"
//!
//! [channel]
//! paths = 4
//! max_delay = 2
//! max_doppler = 2.3
//! doppler_model = "jakes"    # "fixed", "uniform" or "jakes"
//!
//! [simulation]
//! snr_db = [0, 5, 10, 15, 20]
//! trials = 200
//! seed = 7
//! precoders = ["zf", "pcg"]
//!
//! [solver]
//! max_iters = 100
//! tolerance = 1e-8
//! regularization = "inverse-snr"
//! ```
//!
//! Every key outside this schema is rejected. See the field docs for
//! defaults.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::Deserialize;

use crate::afdm::{default_c1, AfdmParams};
use crate::solvers::{Precoder, Preconditioner, SolverConfig};
use crate::sparse::DEFAULT_THRESHOLD_DB;

use super::SimError;

fn parsed<'de, D, T>(d: D) -> Result<T, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: fmt::Display,
{
    String::deserialize(d)?.parse().map_err(de::Error::custom)
}

fn parsed_list<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: fmt::Display,
{
    Vec::<String>::deserialize(d)?
        .iter()
        .map(|s| s.parse().map_err(de::Error::custom))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Waveform {
    Afdm,
    Ofdm,
}

impl Waveform {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Afdm => "AFDM",
            Self::Ofdm => "OFDM",
        }
    }
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Waveform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "afdm" => Ok(Self::Afdm),
            "ofdm" => Ok(Self::Ofdm),
            _ => Err(format!("unknown waveform {s:?} (expected \"afdm\" or \"ofdm\")")),
        }
    }
}

/// How per-path Dopplers are drawn when no explicit list is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DopplerModel {
    /// Every path at `+max_doppler`.
    Fixed,
    /// Uniform on `[-max_doppler, max_doppler]`.
    Uniform,
    /// `max_doppler·cos(θ)`, `θ` uniform on `[0, 2π)`.
    Jakes,
}

impl FromStr for DopplerModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(Self::Fixed),
            "uniform" => Ok(Self::Uniform),
            "jakes" => Ok(Self::Jakes),
            _ => Err(format!("unknown doppler_model {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainModel {
    /// Independent CN(0, 1/P) per path and link.
    Rayleigh,
    /// Every path gain `1/√P`.
    Equal,
}

impl FromStr for GainModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rayleigh" => Ok(Self::Rayleigh),
            "equal" | "unit" => Ok(Self::Equal),
            _ => Err(format!("unknown gain_model {s:?}")),
        }
    }
}

/// Tikhonov weight `ξ` used by every precoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    /// `ξ = σ²` at each SNR point.
    InverseSnr,
    Fixed(f64),
}

impl Regularization {
    pub fn at(&self, noise_power: f64) -> f64 {
        match self {
            Self::InverseSnr => noise_power,
            Self::Fixed(xi) => *xi,
        }
    }
}

impl<'de> Deserialize<'de> for Regularization {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Self::Fixed(x)),
            Raw::Name(s) if s.eq_ignore_ascii_case("inverse-snr") => Ok(Self::InverseSnr),
            Raw::Name(s) => Err(de::Error::custom(format!(
                "regularization must be a number or \"inverse-snr\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// `N`.
    pub subcarriers: usize,
    /// `N_t`.
    pub tx_antennas: usize,
    /// `K`.
    pub users: usize,
    /// `N_k`, so `N_r = K·N_k`.
    #[serde(default = "one")]
    pub rx_per_user: usize,
    /// QAM order: 4, 16 or 64.
    #[serde(default = "four")]
    pub modulation: usize,
    #[serde(deserialize_with = "parsed", default = "afdm")]
    pub waveform: Waveform,
    /// Overrides the default chirp rate (AFDM only).
    pub c1: Option<f64>,
    /// Second chirp rate (AFDM only), default 0.
    pub c2: Option<f64>,
    /// Integer Doppler bound used for the default `c1`; defaults to the
    /// largest `|α|` allowed by `max_doppler`.
    pub alpha_max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// `P`.
    pub paths: usize,
    pub max_delay: usize,
    pub max_doppler: f64,
    /// Explicit per-path delays; drawn uniformly from `0..=max_delay` otherwise.
    pub delays: Option<Vec<usize>>,
    /// Explicit per-path Dopplers; drawn by `doppler_model` otherwise.
    pub dopplers: Option<Vec<f64>>,
    #[serde(deserialize_with = "parsed", default = "jakes")]
    pub doppler_model: DopplerModel,
    #[serde(deserialize_with = "parsed", default = "rayleigh")]
    pub gain_model: GainModel,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub snr_db: Vec<f64>,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(deserialize_with = "parsed_list", default = "all_precoders")]
    pub precoders: Vec<Precoder>,
    /// eSNR threshold of the sparsifier, dB.
    #[serde(default = "default_threshold")]
    pub threshold_db: f64,
    /// Fixed SNR whose noise power references the sparsifier's eSNR. When
    /// absent the operating SNR of each point is used.
    pub sparsify_snr_db: Option<f64>,
    /// Abort trials whose iterative solver misses its tolerance.
    #[serde(default)]
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    /// CG iteration cap `T_p`.
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "inverse_snr")]
    pub regularization: Regularization,
    #[serde(deserialize_with = "parsed", default)]
    pub preconditioner: Preconditioner,
    /// Kaczmarz row updates `T_s`.
    #[serde(default = "default_kaczmarz_iters")]
    pub kaczmarz_iters: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iters: default_max_iters(),
            tolerance: default_tolerance(),
            regularization: Regularization::InverseSnr,
            preconditioner: Preconditioner::None,
            kaczmarz_iters: default_kaczmarz_iters(),
        }
    }
}

impl SolverSettings {
    /// CG controls at noise power `σ²`.
    pub fn cg(&self, noise_power: f64) -> crate::Result<SolverConfig> {
        SolverConfig::new(
            self.max_iters,
            self.tolerance,
            self.regularization.at(noise_power),
            self.preconditioner,
        )
    }

    /// Kaczmarz controls at noise power `σ²`.
    pub fn kaczmarz(&self, noise_power: f64) -> crate::Result<SolverConfig> {
        SolverConfig::new(
            self.kaczmarz_iters,
            self.tolerance,
            self.regularization.at(noise_power),
            Preconditioner::None,
        )
    }
}

/// Complexity-versus-users sweep.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexityConfig {
    pub users: Vec<usize>,
    /// Kaczmarz system dimension; defaults to `tx_antennas`.
    pub n_ts: Option<u64>,
    /// Defaults to `solver.kaczmarz_iters`.
    pub t_s: Option<u64>,
    /// Defaults to `solver.max_iters`.
    pub t_p: Option<u64>,
    pub nnz: u64,
    /// Also run the iterative solvers once per `K` and report measured flops.
    #[serde(default = "yes")]
    pub measure: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub system: SystemConfig,
    pub channel: ChannelConfig,
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub solver: SolverSettings,
    pub complexity: Option<ComplexityConfig>,
}

fn one() -> usize {
    1
}
fn four() -> usize {
    4
}
fn yes() -> bool {
    true
}
fn afdm() -> Waveform {
    Waveform::Afdm
}
fn jakes() -> DopplerModel {
    DopplerModel::Jakes
}
fn rayleigh() -> GainModel {
    GainModel::Rayleigh
}
fn inverse_snr() -> Regularization {
    Regularization::InverseSnr
}
fn all_precoders() -> Vec<Precoder> {
    Precoder::ALL.to_vec()
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD_DB
}
fn default_max_iters() -> usize {
    100
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_kaczmarz_iters() -> usize {
    2000
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::Config(msg.into())
}

impl FromStr for SimConfig {
    type Err = SimError;

    fn from_str(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SimConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    /// `N_r = K·N_k`.
    pub fn rx_antennas(&self) -> usize {
        self.system.users * self.system.rx_per_user
    }

    /// Largest `|α|` the chirp rate must separate: the configured
    /// `alpha_max`, else the largest over the Dopplers the channel can
    /// produce (the fixed ones, or all of `[-ν_max, ν_max]`).
    pub fn alpha_max(&self) -> u32 {
        let integer = |nu: f64| (nu - 0.5).ceil().abs() as u32;
        let ch = &self.channel;
        self.system.alpha_max.unwrap_or_else(|| match (&ch.dopplers, ch.doppler_model) {
            (Some(v), _) => v.iter().map(|nu| integer(*nu)).max().unwrap_or(0),
            (None, DopplerModel::Fixed) => integer(ch.max_doppler),
            (None, _) => integer(ch.max_doppler).max(integer(-ch.max_doppler)),
        })
    }

    /// DAFT parameters for the configured waveform.
    pub fn afdm_params(&self) -> crate::Result<AfdmParams> {
        let n = self.system.subcarriers;
        match self.system.waveform {
            Waveform::Ofdm => AfdmParams::ofdm(n),
            Waveform::Afdm => {
                let c1 = self.system.c1.unwrap_or_else(|| default_c1(self.alpha_max(), n));
                AfdmParams::new(n, c1, self.system.c2.unwrap_or(0.0))
            }
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let s = &self.system;
        if s.subcarriers == 0 || s.tx_antennas == 0 || s.users == 0 || s.rx_per_user == 0 {
            return Err(invalid("subcarriers, tx_antennas, users and rx_per_user must be positive"));
        }
        if ![4, 16, 64].contains(&s.modulation) {
            return Err(invalid(format!("modulation must be 4, 16 or 64, got {}", s.modulation)));
        }
        if s.waveform == Waveform::Ofdm && (s.c1.is_some() || s.c2.is_some()) {
            return Err(invalid("c1/c2 are fixed to zero for the OFDM waveform"));
        }
        self.afdm_params().map_err(|e| invalid(e.to_string()))?;

        let c = &self.channel;
        if c.paths == 0 {
            return Err(invalid("channel.paths must be positive"));
        }
        if c.max_delay >= s.subcarriers {
            return Err(invalid("channel.max_delay must be below subcarriers"));
        }
        if !(c.max_doppler >= 0.0) || !c.max_doppler.is_finite() {
            return Err(invalid("channel.max_doppler must be finite and nonnegative"));
        }
        if let Some(d) = &c.delays {
            if d.len() != c.paths || d.iter().any(|l| *l > c.max_delay) {
                return Err(invalid("channel.delays needs one entry per path, each ≤ max_delay"));
            }
        }
        if let Some(v) = &c.dopplers {
            if v.len() != c.paths || v.iter().any(|nu| !(nu.abs() <= c.max_doppler)) {
                return Err(invalid("channel.dopplers needs one entry per path, each within ±max_doppler"));
            }
        }

        let sim = &self.simulation;
        if sim.snr_db.is_empty() || sim.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(invalid("simulation.snr_db must be a nonempty list of finite values"));
        }
        if sim.trials == 0 {
            return Err(invalid("simulation.trials must be at least 1"));
        }
        if sim.trials > u32::MAX as u64 || sim.snr_db.len() > super::seed::MAX_POINTS {
            return Err(invalid("too many trials or SNR points"));
        }
        if sim.precoders.is_empty() {
            return Err(invalid("simulation.precoders must not be empty"));
        }
        for (i, p) in sim.precoders.iter().enumerate() {
            if sim.precoders[..i].contains(p) {
                return Err(invalid(format!("simulation.precoders lists {p} twice")));
            }
        }
        if sim.threshold_db.is_nan() {
            return Err(invalid("simulation.threshold_db must be a number"));
        }
        if sim.sparsify_snr_db.is_some_and(|x| !x.is_finite()) {
            return Err(invalid("simulation.sparsify_snr_db must be finite"));
        }

        let sv = &self.solver;
        sv.cg(1.0).map_err(|e| invalid(format!("solver: {e}")))?;
        sv.kaczmarz(1.0).map_err(|e| invalid(format!("solver: {e}")))?;
        if let Regularization::Fixed(x) = sv.regularization {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(invalid("solver.regularization must be finite and nonnegative"));
            }
        }

        if let Some(cx) = &self.complexity {
            if cx.users.is_empty() || cx.users.contains(&0) {
                return Err(invalid("complexity.users must be a nonempty list of positive counts"));
            }
            if cx.users.len() > super::seed::MAX_POINTS {
                return Err(invalid("too many complexity.users entries"));
            }
            let params = self.flops_params(cx.users[0]);
            params.validate().map_err(|e| invalid(format!("complexity: {e}")))?;
        }
        Ok(())
    }

    /// Closed-form model parameters at `k` users.
    pub fn flops_params(&self, k: usize) -> crate::metrics::FlopsParams {
        let cx = self.complexity.as_ref();
        crate::metrics::FlopsParams {
            n: self.system.subcarriers as u64,
            k: k as u64,
            n_ts: cx.and_then(|c| c.n_ts).unwrap_or(self.system.tx_antennas as u64),
            t_s: cx.and_then(|c| c.t_s).unwrap_or(self.solver.kaczmarz_iters as u64),
            t_p: cx.and_then(|c| c.t_p).unwrap_or(self.solver.max_iters as u64),
            nnz: cx.map_or(0, |c| c.nnz),
        }
    }
}
