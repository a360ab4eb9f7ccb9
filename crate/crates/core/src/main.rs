use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mimo_afdm::channel::{build_mimo_matrix, build_time_domain_mimo_matrix};
use mimo_afdm::io::write_dense_csv;
use mimo_afdm::sim::{
    draw_channel, noise_power, run_ber_sweep, run_complexity_sweep, trial_rng, write_csv, Purpose, SimConfig, SimError,
};
use mimo_afdm::sparse::sparsify;

/// MIMO-AFDM link simulator.
#[derive(Parser)]
#[command(name = "mimo-afdm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER versus SNR for every configured precoder.
    Ber(Common),
    /// Closed-form and measured precoding flops versus user count.
    Complexity(Common),
    /// Dump one channel realization as `row,col,re,im` CSV.
    Channel {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Kind::Dense)]
        kind: Kind,
        /// SNR point whose trial stream draws the channel.
        #[arg(long, default_value_t = 0)]
        snr_index: usize,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `simulation.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `simulation.threshold_db`.
    #[arg(long, allow_hyphen_values = true)]
    threshold_db: Option<f64>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// DAFT-domain MIMO matrix, every entry.
    Dense,
    /// Sparsified DAFT-domain matrix, retained entries only.
    Sparse,
    /// Time-domain MIMO matrix, every entry.
    Time,
}

impl Common {
    fn load(&self) -> Result<SimConfig, SimError> {
        let mut cfg = SimConfig::from_file(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.simulation.seed = seed;
        }
        if let Some(t) = self.threshold_db {
            cfg.simulation.threshold_db = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn output(&self) -> Result<Box<dyn Write>, SimError> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn pool(&self) -> Result<rayon::ThreadPool, SimError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(SimError::Config("--threads must be positive".into()));
            }
            builder = builder.num_threads(n);
        }
        builder.build().map_err(|e| SimError::Config(e.to_string()))
    }
}

fn dump_channel(common: &Common, kind: Kind, snr_index: usize, trial: u64) -> Result<(), SimError> {
    let cfg = common.load()?;
    let snr_db = *cfg
        .simulation
        .snr_db
        .get(snr_index)
        .ok_or_else(|| SimError::Config(format!("--snr-index {snr_index} is outside the SNR grid")))?;
    let params = cfg.afdm_params()?;
    let mut rng = trial_rng(cfg.simulation.seed, snr_index, trial, Purpose::Channel);
    let spec = draw_channel(&cfg, cfg.rx_antennas(), &mut rng)?;
    let mut out = common.output()?;
    match kind {
        Kind::Dense => write_dense_csv(&mut out, &build_mimo_matrix(&spec, &params)?)?,
        Kind::Time => write_dense_csv(&mut out, &build_time_domain_mimo_matrix(&spec, &params)?)?,
        Kind::Sparse => {
            let h = build_mimo_matrix(&spec, &params)?;
            let n0 = noise_power(cfg.simulation.sparsify_snr_db.unwrap_or(snr_db));
            sparsify(&h, cfg.simulation.threshold_db, n0)?.write_csv(&mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::Ber(common) => {
            let cfg = common.load()?;
            let rows = common.pool()?.install(|| run_ber_sweep(&cfg))?;
            for row in rows.iter().filter(|r| r.aborted > 0) {
                eprintln!(
                    "warning: {} at {} dB: {} trial(s) aborted on non-convergence",
                    row.method,
                    row.snr_db.unwrap_or(f64::NAN),
                    row.aborted
                );
            }
            write_csv(common.output()?, &rows)?;
        }
        Command::Complexity(common) => {
            let cfg = common.load()?;
            let rows = common.pool()?.install(|| run_complexity_sweep(&cfg))?;
            write_csv(common.output()?, &rows)?;
        }
        Command::Channel {
            common,
            kind,
            snr_index,
            trial,
        } => dump_channel(&common, kind, snr_index, trial)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
