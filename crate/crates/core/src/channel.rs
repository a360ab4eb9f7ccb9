//! DAFT-domain channels of doubly-selective multipath links.
//!
//! A path with gain `h`, integer delay `l` and normalized Doppler
//! `ν = α + β` (`α` integer, `β ∈ (-1/2, 1/2]`) acts on the time-domain
//! samples as
//!
//! ```text
//! r[n] = h · e^{-j2πνn/N} · s[n - l]
//! ```
//!
//! where samples with `n - l < 0` come from a chirp-periodic prefix,
//! `s[n] = s[N + n]·e^{-j2πc1(N² + 2Nn)}`. Under that convention the path
//! operator conjugated by the DAFT matrix has the closed form
//!
//! ```text
//! H_i(m, m') = (1/N) · c(l, m, m') · F(l, ν, m, m')
//! c(l, m, m') = e^{j(2π/N)(N·c1·l² - m'·l + N·c2·(m'² - m²))}
//! F(l, ν, m, m') = Σ_{n<N} e^{-j(2π/N)(m + ind - m' + β)n}
//! ind = (α + 2N·c1·l) mod N
//! ```
//!
//! [`build_path_matrix`] evaluates the closed form and
//! [`build_time_domain_path_matrix`] builds the time-domain operator; the two
//! agree through `A^H·M·A` and the tests hold them to that.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::afdm::{cis_turns, AfdmParams};
use crate::{Complex64, ComplexMatrix, ComplexVector, Error, Result};

/// Threshold on `|e^{-j2πθ/N} - 1|` below which the spreading factor takes
/// its limit value `N`.
pub const SPREADING_SINGULARITY: f64 = 1e-12;

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub gain: Complex64,
    pub delay: usize,
    pub doppler: f64,
}

impl PathSpec {
    pub fn new(gain: Complex64, delay: usize, doppler: f64) -> Result<Self> {
        if !doppler.is_finite() || !gain.re.is_finite() || !gain.im.is_finite() {
            return Err(Error::InvalidParameter("path gain and Doppler must be finite".into()));
        }
        Ok(Self { gain, delay, doppler })
    }

    /// Unit-gain path.
    pub fn unit(delay: usize, doppler: f64) -> Result<Self> {
        Self::new(Complex64::new(1.0, 0.0), delay, doppler)
    }

    /// Integer Doppler `α`, chosen so that `ν - α ∈ (-1/2, 1/2]`.
    pub fn integer_doppler(&self) -> i64 {
        (self.doppler - 0.5).ceil() as i64
    }

    /// Fractional Doppler `β = ν - α`.
    pub fn fractional_doppler(&self) -> f64 {
        self.doppler - self.integer_doppler() as f64
    }

    /// Same delay and Doppler, new gain.
    pub fn with_gain(&self, gain: Complex64) -> Self {
        Self { gain, ..*self }
    }
}

/// Paths of one antenna link, with the support bounds they must respect.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    paths: Vec<PathSpec>,
    max_delay: usize,
    max_doppler: f64,
}

impl ChannelProfile {
    pub fn new(paths: Vec<PathSpec>, max_delay: usize, max_doppler: f64) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if !(max_doppler >= 0.0) {
            return Err(Error::InvalidParameter("maximum Doppler must be nonnegative".into()));
        }
        for (i, p) in paths.iter().enumerate() {
            if p.delay > max_delay || p.doppler.abs() > max_doppler {
                return Err(Error::InvalidParameter(format!(
                    "path {i} (delay {}, Doppler {}) outside support (l_max {max_delay}, ν_max {max_doppler})",
                    p.delay, p.doppler
                )));
            }
        }
        Ok(Self {
            paths,
            max_delay,
            max_doppler,
        })
    }

    /// Profile whose bounds are the tightest ones containing `paths`.
    pub fn from_paths(paths: Vec<PathSpec>) -> Result<Self> {
        let max_delay = paths.iter().map(|p| p.delay).max().unwrap_or(0);
        let max_doppler = paths.iter().map(|p| p.doppler.abs()).fold(0.0, f64::max);
        Self::new(paths, max_delay, max_doppler)
    }

    pub fn paths(&self) -> &[PathSpec] {
        &self.paths
    }

    pub fn max_delay(&self) -> usize {
        self.max_delay
    }

    pub fn max_doppler(&self) -> f64 {
        self.max_doppler
    }

    /// Largest `|α|` a Doppler in `[-ν_max, ν_max]` can have.
    pub fn max_integer_doppler(&self) -> u32 {
        (self.max_doppler + 0.5).floor() as u32
    }

    /// Copy with every gain multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            paths: self.paths.iter().map(|p| p.with_gain(p.gain * factor)).collect(),
            ..self.clone()
        }
    }
}

/// MIMO channel: `n_r × n_t` links stored row-major in `(r, t)`, all sharing
/// one delay/Doppler support with independent gains.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoChannelSpec {
    n_t: usize,
    n_r: usize,
    links: Vec<ChannelProfile>,
}

impl MimoChannelSpec {
    pub fn new(n_t: usize, n_r: usize, links: Vec<ChannelProfile>) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::InvalidParameter("antenna counts must be positive".into()));
        }
        if links.len() != n_t * n_r {
            return Err(Error::InconsistentLinks(format!(
                "expected {} links, got {}",
                n_t * n_r,
                links.len()
            )));
        }
        let reference = &links[0];
        for (idx, link) in links.iter().enumerate().skip(1) {
            let same = link.paths.len() == reference.paths.len()
                && link
                    .paths
                    .iter()
                    .zip(&reference.paths)
                    .all(|(a, b)| a.delay == b.delay && a.doppler == b.doppler);
            if !same {
                return Err(Error::InconsistentLinks(format!(
                    "link ({}, {}) does not share the delay/Doppler support of link (0, 0)",
                    idx / n_t,
                    idx % n_t
                )));
            }
        }
        Ok(Self { n_t, n_r, links })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn link(&self, r: usize, t: usize) -> &ChannelProfile {
        &self.links[r * self.n_t + t]
    }

    pub fn links(&self) -> &[ChannelProfile] {
        &self.links
    }
}

fn check_index(index: usize, size: usize) -> Result<()> {
    if index >= size {
        return Err(Error::IndexOutOfRange { index, size });
    }
    Ok(())
}

fn check_delay(path: &PathSpec, params: &AfdmParams) -> Result<()> {
    if path.delay >= params.n {
        return Err(Error::InvalidParameter(format!(
            "delay {} must be below N = {}",
            path.delay, params.n
        )));
    }
    Ok(())
}

/// `ind = (α + 2N·c1·l) mod N`, nonnegative representative.
pub fn index_indicator(path: &PathSpec, params: &AfdmParams) -> Result<usize> {
    let shift = 2.0 * params.n as f64 * params.c1 * path.delay as f64;
    let rounded = shift.round();
    if (shift - rounded).abs() > 1e-9 {
        return Err(Error::NonIntegerShift(shift));
    }
    let n = params.n as i64;
    Ok((path.integer_doppler() + rounded as i64).rem_euclid(n) as usize)
}

/// `c(l, m, m') = e^{j(2π/N)(N·c1·l² - m'·l + N·c2·(m'² - m²))}`.
pub fn phase_factor(delay: usize, m: usize, m_prime: usize, params: &AfdmParams) -> Result<Complex64> {
    let n = params.n;
    check_index(m, n)?;
    check_index(m_prime, n)?;
    let l = delay as f64;
    let (mf, mpf) = (m as f64, m_prime as f64);
    let turns = params.c1 * l * l - ((m_prime * delay) % n) as f64 / n as f64
        + params.c2 * (mpf * mpf - mf * mf);
    Ok(cis_turns(turns))
}

/// Fractional-Doppler spreading factor, the geometric sum
/// `Σ_{n<N} e^{-j(2π/N)θn}` with `θ = m + ind - m' + β`, with limit `N` when
/// `θ ≡ 0 (mod N)`.
pub fn doppler_spreading_factor(
    path: &PathSpec,
    m: usize,
    m_prime: usize,
    params: &AfdmParams,
) -> Result<Complex64> {
    let n = params.n;
    check_index(m, n)?;
    check_index(m_prime, n)?;
    let ind = index_indicator(path, params)?;
    Ok(spreading(n, (m + ind + n - m_prime) % n, path.fractional_doppler()))
}

/// Spreading factor for `θ = shift + beta` with `shift` already reduced mod N.
fn spreading(n: usize, shift: usize, beta: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let den = cis_turns(-(shift as f64 + beta) / n as f64) - one;
    if den.norm() < SPREADING_SINGULARITY {
        return Complex64::new(n as f64, 0.0);
    }
    // e^{-j2πθ} = e^{-j2πβ} because `shift` is an integer.
    (cis_turns(-beta) - one) / den
}

/// Closed-form DAFT-domain matrix of one path, without its gain.
pub fn build_path_matrix(path: &PathSpec, params: &AfdmParams) -> Result<ComplexMatrix> {
    params.validate()?;
    check_delay(path, params)?;
    let n = params.n;
    let ind = index_indicator(path, params)?;
    let beta = path.fractional_doppler();
    let inv_n = 1.0 / n as f64;
    let spread: Vec<Complex64> = (0..n).map(|shift| spreading(n, shift, beta) * inv_n).collect();
    let mut h = ComplexMatrix::zeros(n, n);
    for m in 0..n {
        for mp in 0..n {
            let f = spread[(m + ind + n - mp) % n];
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            h[(m, mp)] = phase_factor(path.delay, m, mp, params)? * f;
        }
    }
    Ok(h)
}

/// Time-domain operator of one path (unit gain): cyclic delay by `l`,
/// Doppler phase `e^{-j2πνn/N}` on output sample `n`, and the chirp-periodic
/// prefix phase `e^{-j2πc1(N² - 2N(l - n))}` on samples that wrap (`n < l`).
pub fn build_time_domain_path_matrix(path: &PathSpec, params: &AfdmParams) -> Result<ComplexMatrix> {
    params.validate()?;
    check_delay(path, params)?;
    let n = params.n;
    let nf = n as f64;
    let l = path.delay;
    let mut m = ComplexMatrix::zeros(n, n);
    for row in 0..n {
        let mut turns = -path.doppler * row as f64 / nf;
        if row < l {
            turns -= params.c1 * (nf * nf - 2.0 * nf * (l - row) as f64);
        }
        m[(row, (row + n - l) % n)] = cis_turns(turns);
    }
    Ok(m)
}

fn combine(paths: &[PathSpec], matrices: &[ComplexMatrix], n: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(n, n);
    for (p, h) in paths.iter().zip(matrices) {
        acc += h * p.gain;
    }
    acc
}

/// `Σ_i h_i·H_i` over the profile's paths.
pub fn build_link_matrix(profile: &ChannelProfile, params: &AfdmParams) -> Result<ComplexMatrix> {
    let mats = profile
        .paths
        .iter()
        .map(|p| build_path_matrix(p, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&profile.paths, &mats, params.n))
}

/// Time-domain counterpart of [`build_link_matrix`].
pub fn build_time_domain_link_matrix(profile: &ChannelProfile, params: &AfdmParams) -> Result<ComplexMatrix> {
    let mats = profile
        .paths
        .iter()
        .map(|p| build_time_domain_path_matrix(p, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&profile.paths, &mats, params.n))
}

fn assemble_mimo(
    spec: &MimoChannelSpec,
    params: &AfdmParams,
    path_matrix: impl Fn(&PathSpec, &AfdmParams) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let n = params.n;
    // Shared support: per-path matrices are built once and reused by every link.
    let mats = spec.links[0]
        .paths
        .iter()
        .map(|p| path_matrix(p, params))
        .collect::<Result<Vec<_>>>()?;
    let mut out = ComplexMatrix::zeros(n * spec.n_r, n * spec.n_t);
    for r in 0..spec.n_r {
        for t in 0..spec.n_t {
            let block = combine(&spec.link(r, t).paths, &mats, n);
            out.view_mut((r * n, t * n), (n, n)).copy_from(&block);
        }
    }
    Ok(out)
}

/// Block matrix whose `(r, t)` block is the link matrix between receive
/// antenna `r` and transmit antenna `t`; shape `(N·N_r, N·N_t)`.
pub fn build_mimo_matrix(spec: &MimoChannelSpec, params: &AfdmParams) -> Result<ComplexMatrix> {
    assemble_mimo(spec, params, build_path_matrix)
}

/// Time-domain counterpart of [`build_mimo_matrix`].
pub fn build_time_domain_mimo_matrix(spec: &MimoChannelSpec, params: &AfdmParams) -> Result<ComplexMatrix> {
    assemble_mimo(spec, params, build_time_domain_path_matrix)
}

/// Circularly-symmetric complex Gaussian sample with variance `variance`.
pub fn complex_gaussian(variance: f64, rng: &mut impl Rng) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// `P` i.i.d. CN(0, 1/P) gains, so the mean total link power is one.
pub fn rayleigh_gains(count: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let var = 1.0 / count as f64;
    (0..count).map(|_| complex_gaussian(var, rng)).collect()
}

/// `H·x + w`, `w ~ CN(0, σ²I)`. With `σ² = 0` no randomness is consumed.
pub fn apply_channel(
    h: &ComplexMatrix,
    x: &ComplexVector,
    noise_power: f64,
    rng: &mut impl Rng,
) -> Result<ComplexVector> {
    if !(noise_power >= 0.0) {
        return Err(Error::NegativeNoisePower(noise_power));
    }
    if h.ncols() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: h.ncols(),
            found: x.len(),
        });
    }
    let mut y = h * x;
    if noise_power > 0.0 {
        for v in y.iter_mut() {
            *v += complex_gaussian(noise_power, rng);
        }
    }
    Ok(y)
}
