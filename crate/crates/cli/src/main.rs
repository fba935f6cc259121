//! `fbs`: run protocols, oracle checks and figure generation from the command line.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure,
//! 3 oracle tolerance breach. Flags override values from `--config`.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use commands::Overrides;
use config::RunConfig;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "fbs", about = "Forward-Brillouin W-state and frequency-translation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a preset or an explicit schedule and write state, report and trace.
    Simulate(Common),
    /// Compare the factored propagator with brute-force evolution on random drives.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Negative control: perturb a coefficient so every comparison fails.
        #[arg(long, hide = true)]
        corrupt_coefficient: bool,
    },
    /// Regenerate the probability-trace figures as CSV and SVG.
    Figures(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Run file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// w-standard, w-perfect, w-lasers-on, qft, herald or pi-pulse.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated list of csv, svg.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gamma_over_g: Option<f64>,
    /// Collective drive rate sqrt(eta).
    #[arg(long)]
    alpha_max: Option<f64>,
    /// Number of pump/Stokes pairs.
    #[arg(long)]
    n: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Overrides {
            preset: self.preset.clone(),
            out: self.out.clone(),
            formats: self.format.clone(),
            seed: self.seed,
            gamma_over_g: self.gamma_over_g,
            alpha_max: self.alpha_max,
            n: self.n,
        }
        .apply(&mut cfg);
        Ok(cfg)
    }
}

fn version() -> &'static str {
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let s = format!(
        "{} ({} {}-{}, {profile})",
        env!("CARGO_PKG_VERSION"),
        env!("CARGO_PKG_NAME"),
        std::env::consts::ARCH,
        std::env::consts::OS,
    );
    Box::leak(s.into_boxed_str())
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Simulate(c) => commands::simulate(&c.load()?),
        Command::OracleCheck {
            common,
            corrupt_coefficient,
        } => commands::oracle_check(&common.load()?, common.n, corrupt_coefficient),
        Command::Figures(c) => commands::figures(&c.load()?),
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().version(version()).try_get_matches();
    let cli = match matches.and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
