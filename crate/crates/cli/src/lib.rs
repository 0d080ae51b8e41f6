//! Experiment runner for the `coherent-qkd` library: analytic sweeps, the
//! normalized information curves, Monte Carlo sessions and loss-exploiting
//! attacks, all written as CSV.

pub mod commands;
pub mod config;
mod error;
pub mod grid;
pub mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};

use config::{parse_config, ExperimentConfig};
use report::CsvReport;

#[derive(Debug, Parser)]
#[command(name = "cohqkd", version, about = "Weak-coherent-pulse QKD experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form rates, error rates and eavesdropper information.
    Analytic(Flags),
    /// Normalized eavesdropper information against transmission rate.
    Fig3(Flags),
    /// Monte Carlo sessions compared with the closed forms.
    Simulate(Flags),
    /// Beam-splitting, photon-number-splitting and blocking attacks.
    Attack(Flags),
}

/// Flags shared by all subcommands. Each overrides the same key of the
/// `--config` file.
#[derive(Debug, Args, Default)]
pub struct Flags {
    /// 4-state, 2-state or 4+2.
    #[arg(long)]
    pub protocol: Option<String>,
    /// Mean photon number per signal pulse.
    #[arg(long)]
    pub mu: Option<String>,
    /// Fraction of pulses the eavesdropper attacks.
    #[arg(long)]
    pub eta: Option<String>,
    /// Line loss in dB.
    #[arg(long)]
    pub loss_db: Option<String>,
    /// Fiber length in km (0.2 dB/km unless --attenuation is set).
    #[arg(long)]
    pub length_km: Option<String>,
    /// Fiber attenuation in dB/km.
    #[arg(long)]
    pub attenuation: Option<String>,
    #[arg(long)]
    pub n_pulses: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// conjugate, symmetric, povm, block, beam-split, pns or none.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Sweep: a,b,c | lin:lo:hi:n | log:lo:hi:n (mu, or t for fig3).
    #[arg(long)]
    pub grid: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<String>,
    /// key = value file; flags given here win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for the simulation.
    #[arg(long)]
    pub threads: Option<String>,
    /// Photon statistics of polarization pulses: poisson or thermal.
    #[arg(long)]
    pub source: Option<String>,
    /// Phase reference: parallel, parallel:<intensity factor> or weak.
    #[arg(long)]
    pub reference: Option<String>,
    /// Beam-split fraction kept by the eavesdropper.
    #[arg(long)]
    pub split: Option<String>,
    /// Per-detector dark-count probability.
    #[arg(long)]
    pub dark_count: Option<String>,
}

impl Flags {
    fn overrides(&self) -> BTreeMap<String, String> {
        [
            ("protocol", &self.protocol),
            ("mu", &self.mu),
            ("eta", &self.eta),
            ("loss-db", &self.loss_db),
            ("length-km", &self.length_km),
            ("attenuation", &self.attenuation),
            ("n-pulses", &self.n_pulses),
            ("seed", &self.seed),
            ("strategy", &self.strategy),
            ("grid", &self.grid),
            ("out", &self.out),
            ("threads", &self.threads),
            ("source", &self.source),
            ("reference", &self.reference),
            ("split", &self.split),
            ("dark-count", &self.dark_count),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
        .collect()
    }

    pub fn resolve(&self) -> CliResult<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("config {}: {e}", path.display()))
                })?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        ExperimentConfig::merged(file, self.overrides())
    }
}

/// Runs a parsed command, writing the report to `--out` or to `stdout`.
/// A simulation with disagreeing rows still writes its report and then
/// returns [`CliError::Statistical`].
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = match &cli.command {
        Command::Analytic(f) | Command::Fig3(f) | Command::Simulate(f) | Command::Attack(f) => {
            f.resolve()?
        }
    };
    let mut failed = Vec::new();
    let report: CsvReport = match &cli.command {
        Command::Analytic(_) => commands::cmd_analytic(&cfg)?,
        Command::Fig3(_) => commands::cmd_fig3(&cfg)?,
        Command::Attack(_) => commands::cmd_attack(&cfg)?,
        Command::Simulate(_) => {
            let out = commands::cmd_simulate(&cfg)?;
            failed = out.failed_rows;
            out.report
        }
    };
    match &cfg.out {
        Some(path) => fs::write(path, report.to_bytes()?)?,
        None => report.write_to(&mut *stdout)?,
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Statistical(format!(
            "{} of {} rows outside the {}-sigma band (rows {:?})",
            failed.len(),
            report.rows.len(),
            commands::Z_LIMIT,
            failed
        )))
    }
}

/// Parses `args` (program name first) and runs them; returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
