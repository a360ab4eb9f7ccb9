//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line;
//! run with `--nocapture` to see them next to the harness summary.
//!
//! Oracles here are built from the defining formulas, not from the library
//! routines under test.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::time::Instant;

use mimo_afdm::afdm::{build_daft_matrix, default_c1, AfdmParams};
use mimo_afdm::channel::{build_link_matrix, build_mimo_matrix, rayleigh_gains, ChannelProfile, PathSpec};
use mimo_afdm::metrics::{flops_analytic, FlopsParams};
use mimo_afdm::sim::{draw_channel, run_ber_sweep, run_complexity_sweep, trial_rng, write_csv, Purpose, SimConfig, SweepRow};
use mimo_afdm::solvers::{cg_solve, pcg_precode, zf_precode, Precoder, Preconditioner, SolverConfig};
use mimo_afdm::sparse::sparsify;
use mimo_afdm::{Complex64, ComplexMatrix, ComplexVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

fn report(id: u32, name: &str, started: Instant, failures: &[String], detail: &str) {
    let secs = started.elapsed().as_secs_f64();
    if failures.is_empty() {
        println!("PASS [{id}] {name} ({detail}; {secs:.1} s)");
    } else {
        println!("FAIL [{id}] {name} ({detail}; {secs:.1} s)");
        for f in failures.iter().take(10) {
            println!("    {f}");
        }
        panic!("[{id}] {name}: {} failure(s), first: {}", failures.len(), failures[0]);
    }
}

fn cis(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (turns - turns.round()))
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    // Box-Muller, unit variance per component.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    Complex64::from_polar((-2.0 * u1.ln()).sqrt(), TAU * u2)
}

fn daft_oracle(n: usize, c1: f64, c2: f64) -> ComplexMatrix {
    let nf = n as f64;
    ComplexMatrix::from_fn(n, n, |r, c| {
        let (r, c) = (r as f64, c as f64);
        cis(c1 * r * r + r * c / nf + c2 * c * c) / nf.sqrt()
    })
}

/// Time-domain response of one link built sample by sample: chirp-periodic
/// prefix, delay, Doppler rotation, gain.
fn time_domain_oracle(paths: &[PathSpec], gains: &[Complex64], n: usize, c1: f64) -> ComplexMatrix {
    let nf = n as f64;
    let mut m = ComplexMatrix::zeros(n, n);
    for col in 0..n {
        let mut s = vec![Complex64::new(0.0, 0.0); n];
        s[col] = Complex64::new(1.0, 0.0);
        let prefixed = |k: i64| -> Complex64 {
            if k >= 0 {
                s[k as usize]
            } else {
                let kf = k as f64;
                s[(k + n as i64) as usize] * cis(-c1 * (nf * nf + 2.0 * nf * kf))
            }
        };
        for row in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, g) in paths.iter().zip(gains) {
                let doppler = cis(-p.doppler * row as f64 / nf);
                acc += g * doppler * prefixed(row as i64 - p.delay as i64);
            }
            m[(row, col)] = acc;
        }
    }
    m
}

fn alpha_of(nu: f64) -> u32 {
    (nu - 0.5).ceil().abs() as u32
}

#[test]
fn acceptance_1_channel_matches_time_domain_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let n = [8, 16, 32, 64][trial % 4];
        let p = rng.random_range(1..=4);
        let nu_max = rng.random_range(0.3..2.5);
        let dopplers: Vec<f64> = (0..p).map(|_| rng.random_range(-nu_max..nu_max)).collect();
        let delays: Vec<usize> = (0..p).map(|_| rng.random_range(0..=3)).collect();
        let alpha_max = dopplers.iter().map(|&v| alpha_of(v)).max().unwrap();
        let c1 = default_c1(alpha_max, n);
        let c2 = if trial % 2 == 0 { 0.0 } else { rng.random::<f64>() / (2.0 * n as f64) };
        let gains = rayleigh_gains(p, &mut rng);
        let paths: Vec<PathSpec> = (0..p)
            .map(|i| PathSpec::new(gains[i], delays[i], dopplers[i]).unwrap())
            .collect();
        let profile = ChannelProfile::from_paths(paths.clone()).unwrap();
        let params = AfdmParams::new(n, c1, c2).unwrap();
        let closed = build_link_matrix(&profile, &params).unwrap();
        let a = daft_oracle(n, c1, c2);
        let oracle = a.adjoint() * time_domain_oracle(&paths, &gains, n, c1) * &a;
        let rel = (&closed - &oracle).norm() / oracle.norm();
        worst = worst.max(rel);
        if !(rel < 1e-9) {
            failures.push(format!("trial {trial}: N={n} P={p} rel err {rel:.3e}"));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    if secs >= 30.0 {
        failures.push(format!("runtime {secs:.1} s"));
    }
    report(1, "channel oracle equivalence", started, &failures, &format!("200 channels, worst rel err {worst:.2e}"));
}

#[test]
fn acceptance_2_daft_is_unitary() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for n in [2, 3, 8, 16, 17, 32, 64, 128] {
        for _ in 0..5 {
            let (c1, c2) = (rng.random::<f64>(), rng.random::<f64>());
            let a = build_daft_matrix(&AfdmParams::new(n, c1, c2).unwrap()).unwrap();
            let err = (&a * a.adjoint() - ComplexMatrix::identity(n, n)).norm();
            worst = worst.max(err);
            if !(err < 1e-10) {
                failures.push(format!("N={n} c1={c1} c2={c2}: ‖AA^H − I‖ = {err:.3e}"));
            }
            let formula = (&a - daft_oracle(n, c1, c2)).norm();
            if !(formula < 1e-10) {
                failures.push(format!("N={n}: differs from the entry formula by {formula:.3e}"));
            }
        }
        let a = build_daft_matrix(&AfdmParams::ofdm(n).unwrap()).unwrap();
        let idft = ComplexMatrix::from_fn(n, n, |r, c| {
            Complex64::from_polar(1.0, TAU * (r * c) as f64 / n as f64) / (n as f64).sqrt()
        });
        let diff = (&a - &idft).iter().map(|d| d.norm()).fold(0.0, f64::max);
        if !(diff < 1e-12) {
            failures.push(format!("N={n}: OFDM case differs from the IDFT by {diff:.3e}"));
        }
    }
    report(2, "DAFT unitarity", started, &failures, &format!("worst ‖AA^H − I‖ {worst:.2e}"));
}

/// `Q·diag(λ)·Q^H` with `Q` from a QR factorization, `λ` uniform on `[1, κ]`
/// and both ends of the interval present.
fn random_hpd(n: usize, kappa: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let q = g.qr().q();
    let lambda = ComplexVector::from_fn(n, |i, _| {
        let l = match i {
            0 => 1.0,
            _ if i == n - 1 => kappa,
            _ => 1.0 + (kappa - 1.0) * rng.random::<f64>(),
        };
        Complex64::new(l, 0.0)
    });
    let a = &q * ComplexMatrix::from_diagonal(&lambda) * q.adjoint();
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

#[test]
fn acceptance_3_cg_reaches_the_direct_solution() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let n = rng.random_range(1..=64);
        let kappa = 10f64.powf(rng.random_range(0.0..=4.0));
        let a = random_hpd(n, kappa, &mut rng);
        let b = ComplexVector::from_fn(n, |_, _| gaussian(&mut rng));
        let direct = a.clone().lu().solve(&b).unwrap();
        let cfg = SolverConfig::new(n, 1e-13 * b.norm(), 0.0, Preconditioner::None).unwrap();
        let r = cg_solve(&a, &b, &cfg, &ComplexVector::zeros(n)).unwrap();
        let rel = (&r.solution - &direct).norm() / direct.norm();
        worst = worst.max(rel);
        if !(rel < 1e-8) || r.iterations > n {
            failures.push(format!("trial {trial}: n={n} κ={kappa:.1e} rel err {rel:.3e} after {} iterations", r.iterations));
        }
    }
    let a = ComplexMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0].map(|v| Complex64::new(v, 0.0)));
    let b = ComplexVector::from_row_slice(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]);
    let cfg = SolverConfig::new(2, 1e-14, 0.0, Preconditioner::None).unwrap();
    let x = cg_solve(&a, &b, &cfg, &ComplexVector::zeros(2)).unwrap().solution;
    for (got, want) in x.iter().zip([1.0 / 11.0, 7.0 / 11.0]) {
        if !((got - Complex64::new(want, 0.0)).norm() < 1e-10) {
            failures.push(format!("2×2 fixture: got {got}, want {want}"));
        }
    }
    report(3, "CG correctness", started, &failures, &format!("100 HPD systems, worst rel err {worst:.2e}"));
}

const PARITY: &str = r#"
[system]
subcarriers = 16
tx_antennas = 8
users = 4
modulation = 4

[channel]
paths = 3
max_delay = 2
max_doppler = 2.3

[simulation]
snr_db = [0, 5, 10, 15, 20]
trials = 800
seed = 4004
precoders = ["zf", "pcg"]
threshold_db = -inf

[solver]
max_iters = 400
tolerance = 1e-10
regularization = 1e-3
"#;

#[test]
fn acceptance_4_pcg_matches_zf() {
    let started = Instant::now();
    let cfg: SimConfig = PARITY.parse().unwrap();
    let params = cfg.afdm_params().unwrap();
    let solver = cfg.solver.cg(1.0).unwrap();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let mut rng = trial_rng(77, 0, trial, Purpose::Channel);
        let spec = draw_channel(&cfg, cfg.rx_antennas(), &mut rng).unwrap();
        let h = build_mimo_matrix(&spec, &params).unwrap();
        let b = ComplexVector::from_fn(h.nrows(), |_, _| {
            Complex64::new(if rng.random() { 1.0 } else { -1.0 }, if rng.random() { 1.0 } else { -1.0 })
                / 2f64.sqrt()
        });
        let s = sparsify(&h, f64::NEG_INFINITY, 1.0).unwrap();
        let pcg = pcg_precode(&s, &b, &solver).unwrap();
        let zf = zf_precode(&h, &b, 1e-3).unwrap();
        let rel = (&pcg.solution - &zf).norm() / zf.norm();
        worst = worst.max(rel);
        if !(rel < 1e-6) || !pcg.converged {
            failures.push(format!("channel {trial}: rel diff {rel:.3e}, converged {}", pcg.converged));
        }
    }

    let rows = run_ber_sweep(&cfg).unwrap();
    let (zf, pcg): (Vec<&SweepRow>, Vec<&SweepRow>) = rows.iter().partition(|r| r.method == "ZF");
    let mut curve = Vec::new();
    for (z, p) in zf.iter().zip(&pcg) {
        let se = (z.ber_std_error().unwrap().powi(2) + p.ber_std_error().unwrap().powi(2)).sqrt();
        let (bz, bp) = (z.ber().unwrap(), p.ber().unwrap());
        curve.push(format!("{} dB {bz:.2e}/{bp:.2e}", z.snr_db.unwrap()));
        if z.bits < 100_000 || p.bits < 100_000 {
            failures.push(format!("{} dB: only {} bits", z.snr_db.unwrap(), z.bits.min(p.bits)));
        }
        if (bz - bp).abs() > 2.0 * se {
            failures.push(format!("{} dB: ZF {bz:.3e} vs PCG {bp:.3e}, 2 SE = {:.3e}", z.snr_db.unwrap(), 2.0 * se));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    if secs >= 300.0 {
        failures.push(format!("runtime {secs:.1} s"));
    }
    report(
        4,
        "PCG/ZF parity",
        started,
        &failures,
        &format!("worst rel diff {worst:.2e}; BER ZF/PCG {}", curve.join(", ")),
    );
}

fn doppler_config(waveform: &str) -> SimConfig {
    format!(
        r#"
[system]
subcarriers = 16
tx_antennas = 10
users = 8
waveform = "{waveform}"

[channel]
paths = 4
max_delay = 2
max_doppler = 2.5
doppler_model = "fixed"

[simulation]
snr_db = [0, 5, 10, 15, 20]
trials = 400
seed = 2024
precoders = ["pcg"]
sparsify_snr_db = 10

[solver]
max_iters = 200
regularization = 1e-3
"#
    )
    .parse()
    .unwrap()
}

#[test]
fn acceptance_5_afdm_beats_ofdm_under_high_doppler() {
    let started = Instant::now();
    let afdm = run_ber_sweep(&doppler_config("afdm")).unwrap();
    let ofdm = run_ber_sweep(&doppler_config("ofdm")).unwrap();
    let mut failures = Vec::new();
    let mut curve = Vec::new();
    for (a, o) in afdm.iter().zip(&ofdm) {
        let snr = a.snr_db.unwrap();
        let (ba, bo) = (a.ber().unwrap(), o.ber().unwrap());
        curve.push(format!("{snr} dB {ba:.2e}/{bo:.2e}"));
        if a.bits < 100_000 || o.bits < 100_000 {
            failures.push(format!("{snr} dB: only {} bits", a.bits.min(o.bits)));
        }
        if snr >= 10.0 && !(ba < bo) {
            failures.push(format!("{snr} dB: AFDM {ba:.3e} is not below OFDM {bo:.3e}"));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    if secs >= 600.0 {
        failures.push(format!("runtime {secs:.1} s"));
    }
    report(5, "Doppler robustness ordering", started, &failures, &format!("BER AFDM/OFDM {}", curve.join(", ")));
}

const COMPLEXITY: &str = r#"
[system]
subcarriers = 16
tx_antennas = 64
users = 9

[channel]
paths = 3
max_delay = 2
max_doppler = 2.3

[simulation]
snr_db = [10]
trials = 1
precoders = ["pcg", "swor-rka", "zf", "rka"]

[complexity]
users = [9, 10, 11, 12, 13, 14, 15, 16]
n_ts = 1024
t_s = 2000
t_p = 20
nnz = 20000
measure = false
"#;

#[test]
fn acceptance_6_complexity_ordering() {
    let started = Instant::now();
    let mut failures = Vec::new();

    // Closed forms written out, on a spread of parameter values.
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for _ in 0..200 {
        let p = FlopsParams {
            n: rng.random_range(1..=256),
            k: rng.random_range(1..=64),
            n_ts: rng.random_range(1..=4096),
            t_s: rng.random_range(1..=10_000),
            t_p: rng.random_range(1..=500),
            nnz: rng.random_range(1..=1_000_000),
        };
        let want = [
            (Precoder::Zf, p.n * p.n * 2 * p.k * p.k * p.n_ts),
            (Precoder::Rka, p.n_ts * p.t_s),
            (Precoder::SworRka, p.n_ts * p.t_s + 2 * p.n_ts * p.k),
            (Precoder::Pcg, p.nnz + p.nnz * p.t_p),
        ];
        for (method, w) in want {
            let got = flops_analytic(method, &p).unwrap();
            if got != w {
                failures.push(format!("{method} at {p:?}: {got} != {w}"));
            }
        }
    }

    let cfg: SimConfig = COMPLEXITY.parse().unwrap();
    let cx = cfg.complexity.as_ref().unwrap();
    assert!(cx.nnz * (1 + cx.t_p.unwrap()) < cx.n_ts.unwrap() * cx.t_s.unwrap());
    let rows = run_complexity_sweep(&cfg).unwrap();
    let flops = |label: &str, k: usize| -> u64 {
        rows.iter().find(|r| r.method == label && r.users == k).unwrap().total_flops
    };
    let n_ts = cx.n_ts.unwrap();
    let zf9 = flops("ZF", 9);
    for k in 9..=16usize {
        let (zf, rka, swor, pcg) = (flops("ZF", k), flops("rKA", k), flops("SwoR-rKA", k), flops("PCG", k));
        if !(pcg < rka && rka < swor && swor < zf) {
            failures.push(format!("K={k}: PCG {pcg}, rKA {rka}, SwoR-rKA {swor}, ZF {zf} out of order"));
        }
        if zf * 81 != zf9 * (k * k) as u64 {
            failures.push(format!("K={k}: ZF {zf} is not ZF(9)·K²/81"));
        }
        if rka != flops("rKA", 9) || pcg != flops("PCG", 9) {
            failures.push(format!("K={k}: rKA or PCG changed with K"));
        }
        if pcg != cx.nnz * (1 + cx.t_p.unwrap()) {
            failures.push(format!("K={k}: PCG {pcg} is not nnz·(1 + T_p)"));
        }
        // Only the per-epoch shuffle term 2·N_ts·K moves with K; T_s dominates it.
        if swor - rka != 2 * n_ts * k as u64 {
            failures.push(format!("K={k}: SwoR-rKA − rKA = {} != 2·N_ts·K", swor - rka));
        }
    }
    let swor_spread = (flops("SwoR-rKA", 16) - flops("SwoR-rKA", 9)) as f64 / flops("SwoR-rKA", 9) as f64;
    if !(swor_spread < 0.01) {
        failures.push(format!("SwoR-rKA varies by {:.2}% over K = 9..16", 100.0 * swor_spread));
    }
    report(
        6,
        "complexity reproduction",
        started,
        &failures,
        &format!("K = 9..16, ZF ×{:.2}, SwoR-rKA spread {:.2}%", flops("ZF", 16) as f64 / zf9 as f64, 100.0 * swor_spread),
    );
}

#[test]
fn acceptance_7_sparsifier_properties() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let cfg: SimConfig = PARITY.parse().unwrap();
    let params = cfg.afdm_params().unwrap();
    let thresholds = [-40.0, -30.0, -20.0, -15.0, -12.0, -8.0, -4.0, 0.0, 5.0, 20.0];
    for trial in 0..100 {
        let mut rng = trial_rng(707, 0, trial, Purpose::Channel);
        let spec = draw_channel(&cfg, cfg.rx_antennas(), &mut rng).unwrap();
        let h = build_mimo_matrix(&spec, &params).unwrap();
        let sigma2 = 0.1;

        let lossless = sparsify(&h, f64::NEG_INFINITY, sigma2).unwrap();
        let err = (lossless.to_dense() - &h).iter().map(|d| d.norm()).fold(0.0, f64::max);
        if !(err < 1e-15) {
            failures.push(format!("channel {trial}: lossless error {err:.3e}"));
        }

        let mut last = usize::MAX;
        for &t in &thresholds {
            let s = sparsify(&h, t, sigma2).unwrap();
            if s.nnz() > last {
                failures.push(format!("channel {trial}: nnz rose to {} at {t} dB", s.nnz()));
            }
            last = s.nnz();
            for r in 0..h.nrows() {
                let (cols, vals) = s.row(r);
                let peak = h.row(r).iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
                let kept_peak = vals.iter().any(|v| v.norm_sqr() == peak);
                if cols.is_empty() || !kept_peak {
                    failures.push(format!("channel {trial}, row {r} at {t} dB: row maximum dropped"));
                }
                for (&c, v) in cols.iter().zip(vals) {
                    let esnr = 10.0 * (v.norm_sqr() / sigma2).log10();
                    if esnr < t && v.norm_sqr() != peak {
                        failures.push(format!("channel {trial} ({r},{c}): kept at {esnr:.1} dB < {t} dB"));
                    }
                }
            }
        }
    }

    // One path at delay 1 with zero Doppler and c1 = 5/32: ind = 2N·c1·1 = 5.
    let n = 16;
    let params = AfdmParams::new(n, default_c1(2, n), 0.0).unwrap();
    let path = PathSpec::new(Complex64::new(1.0, 0.0), 1, 0.0).unwrap();
    let h = build_link_matrix(&ChannelProfile::from_paths(vec![path]).unwrap(), &params).unwrap();
    let s = sparsify(&h, -12.0, 0.1).unwrap();
    if s.nnz() != n {
        failures.push(format!("one-path pattern: nnz {} != {n}", s.nnz()));
    }
    for (r, c, v) in s.entries() {
        if c != (r + 5) % n || !((v.norm() - 1.0).abs() < 1e-12) {
            failures.push(format!("one-path pattern: entry ({r},{c}) = {v}"));
        }
    }
    report(7, "sparsifier properties", started, &failures, "100 channels × 10 thresholds, ind = 5 pattern at N = 16");
}

const AWGN: &str = r#"
[system]
subcarriers = 64
tx_antennas = 1
users = 1

[channel]
paths = 1
max_delay = 0
max_doppler = 0.0
gain_model = "equal"

[simulation]
snr_db = [0, 4, 8]
trials = 800
seed = 8008
precoders = ["zf"]
"#;

#[test]
fn acceptance_8_awgn_matches_q_function() {
    let started = Instant::now();
    let rows = run_ber_sweep(&AWGN.parse().unwrap()).unwrap();
    let mut failures = Vec::new();
    let mut curve = Vec::new();
    for row in &rows {
        let snr = row.snr_db.unwrap();
        // Gray 4-QAM at Es/N0 = γ: Q(√γ) = erfc(√(γ/2))/2.
        let gamma = 10f64.powf(snr / 10.0);
        let theory = 0.5 * erfc((gamma / 2.0).sqrt());
        let se = (theory * (1.0 - theory) / row.bits as f64).sqrt();
        let got = row.ber().unwrap();
        curve.push(format!("{snr} dB {got:.3e} vs {theory:.3e}"));
        if row.bits < 100_000 || (got - theory).abs() > 3.0 * se {
            failures.push(format!("{snr} dB: BER {got:.4e}, theory {theory:.4e}, 3 SE = {:.2e}", 3.0 * se));
        }
    }
    report(8, "AWGN sanity", started, &failures, &curve.join(", "));
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn golden_csv(threads: usize) -> Vec<u8> {
    let cfg = SimConfig::from_file(fixture("golden.toml")).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let rows = pool.install(|| run_ber_sweep(&cfg)).unwrap();
    let mut out = Vec::new();
    write_csv(&mut out, &rows).unwrap();
    out
}

#[test]
fn acceptance_9_golden_run_is_deterministic() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let frozen = std::fs::read(fixture("golden.csv")).unwrap();
    let runs: Vec<(usize, Vec<u8>)> = [1, 2, 4, 7].into_iter().map(|t| (t, golden_csv(t))).collect();
    for (threads, csv) in &runs {
        if csv != &runs[0].1 {
            failures.push(format!("{threads} threads differ from 1 thread"));
        }
        if csv != &frozen {
            failures.push(format!("{threads} threads differ from the frozen CSV"));
        }
    }
    report(9, "determinism", started, &failures, "golden fixture at 1, 2, 4 and 7 threads");
}
