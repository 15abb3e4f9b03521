//! `pforge`: capacities, potentials, Smyth-type programs and integer polynomials
//! with all roots in a prescribed real set.

mod commands;
mod io;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VERIFY: u8 = 2;
const EXIT_CONSTRUCT: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "pforge", version, about = "Potential theory and integer polynomials with prescribed real roots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: Config,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Config {
    /// Target set, JSON `{"intervals": [["lo","hi"], ...], "ray": ["s","+inf"]}`.
    #[arg(long, global = true)]
    pub sigma: Option<PathBuf>,
    /// Measure JSON `{"components": [...]}`; defaults to the equilibrium measure of `--sigma`.
    #[arg(long, global = true)]
    pub measure: Option<PathBuf>,
    /// Polynomial pool, a JSON list of `{"coeffs": [...]}` (constant term first).
    #[arg(long, global = true)]
    pub pool: Option<PathBuf>,
    /// `trace`, `pointcount:q` or `custom:<file>`.
    #[arg(long, global = true)]
    pub objective: Option<String>,
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// Working precision in bits for fixed-point stages.
    #[arg(long, global = true, default_value_t = 768)]
    pub precision: u32,
    /// Number of sample points for grids and collocation.
    #[arg(long, global = true, default_value_t = 512)]
    pub grid: usize,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; a `.csv` extension selects the tabular form.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Config {
    fn validate(&self) -> Result<(), CliError> {
        if self.precision < 64 {
            return Err(CliError::Usage(format!("--precision must be at least 64, got {}", self.precision)));
        }
        if self.grid < 2 {
            return Err(CliError::Usage(format!("--grid must be at least 2, got {}", self.grid)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Logarithmic capacity of `--sigma`.
    Capacity,
    /// Equilibrium measure of `--sigma`.
    Equilibrium,
    /// Potential of `--measure` on a grid or at `--at` points.
    Potential {
        #[arg(long, allow_hyphen_values = true)]
        at: Vec<f64>,
    },
    /// The balayage of the origin onto the single interval in `--sigma`.
    Nu,
    /// Balayage of a point mass onto the single interval in `--sigma`.
    Balayage {
        #[arg(long, allow_hyphen_values = true)]
        point: f64,
    },
    /// The equilibrium/nu mixture with least mean.
    Serre,
    /// Checks a certificate against `--objective`.
    SmythCertify {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Best certificate over `--pool`.
    SmythOptimize,
    /// Optimal measure of the dual program over `--pool`.
    SmythDual {
        /// `lo,hi` window for the measure on unbounded domains.
        #[arg(long, allow_hyphen_values = true)]
        truncate: Option<String>,
    },
    /// Monic integer polynomial of `--degree` with roots in `--sigma` distributed like `--measure`.
    Construct,
    /// Point-count bounds over the finite field with `q` elements.
    Honda {
        #[arg(long)]
        q: u64,
    },
    /// Sweetened `--measure` relative to `--reference` and `--sigma`.
    Sweeten {
        #[arg(long)]
        reference: PathBuf,
    },
    /// Summary of `--measure` on `--sigma`, with the potential domination check for a weighted `--pool`.
    Report,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verify(String),
    Construct(String),
}

impl From<pforge::Error> for CliError {
    fn from(e: pforge::Error) -> Self {
        use pforge::Error as E;
        let msg = e.to_string();
        match e {
            E::ConstructionFailed { .. } | E::RootEscape(_) | E::PruneInfeasible(_) => CliError::Construct(msg),
            E::IterationLimit(_) | E::Infeasible(_) | E::Unbounded(_) | E::TailUncertified(_) => CliError::Verify(msg),
            _ => CliError::Usage(msg),
        }
    }
}

/// A finished command: what to write, and whether its checks passed.
pub struct Outcome {
    pub json: serde_json::Value,
    pub csv: Option<String>,
    pub failure: Option<String>,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let cfg = &cli.config;
    cfg.validate()?;
    match cli.command {
        Command::Capacity => commands::capacity(cfg),
        Command::Equilibrium => commands::equilibrium(cfg),
        Command::Potential { at } => commands::potential(cfg, &at),
        Command::Nu => commands::nu(cfg),
        Command::Balayage { point } => commands::balayage(cfg, point),
        Command::Serre => commands::serre(cfg),
        Command::SmythCertify { cert } => commands::smyth_certify(cfg, &cert),
        Command::SmythOptimize => commands::smyth_optimize(cfg),
        Command::SmythDual { truncate } => commands::smyth_dual(cfg, truncate.as_deref()),
        Command::Construct => commands::construct(cfg),
        Command::Honda { q } => commands::honda(cfg, q),
        Command::Sweeten { reference } => commands::sweeten(cfg, &reference),
        Command::Report => commands::report(cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let out = cli.config.out.clone();
    let result = run(cli).and_then(|o| {
        io::emit(o.json, o.csv, out.as_deref())?;
        match o.failure {
            Some(why) => Err(CliError::Verify(why)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Verify(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(CliError::Construct(m)) => {
            eprintln!("construction failed: {m}");
            ExitCode::from(EXIT_CONSTRUCT)
        }
    }
}
