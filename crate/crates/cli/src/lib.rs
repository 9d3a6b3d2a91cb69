//! Batch driver for the exotic white-noise engine.
//!
//! `exotic <basis-check|embed|heat|cesaro-scan>` reads an
//! [`ExperimentConfig`](config::ExperimentConfig), applies flag overrides and
//! writes CSV/JSON reports. Exit codes: 0 every check passed, 1 a tolerance
//! failed, 2 configuration, parse or I/O error.

pub mod commands;
pub mod config;
pub mod report;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use report::ReportWriter;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] exotic_core::Error),
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "exotic",
    version,
    about = "Exotic white-noise calculus experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (JSON); defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Cesàro ladder, e.g. "100,1000,10000".
    #[arg(long, global = true, value_name = "N1,N2,...", value_parser = parse_ladder)]
    pub ladder: Option<Ladder>,
    /// Main tolerance of the subcommand: C1 deviation (basis-check),
    /// recovery error (embed), semigroup defect (heat) or intertwining
    /// discrepancy (cesaro-scan).
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
    /// Coefficient file (embed) or initial exotic Fock vector (heat,
    /// cesaro-scan).
    #[arg(long, global = true, value_name = "PATH")]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Cesàro orthonormality, uniform frame bound and independence checks.
    BasisCheck,
    /// Embedding bound, grading shift and coefficient recovery.
    Embed,
    /// Exotic heat flow snapshots and residuals.
    Heat,
    /// Exotic Laplacian ladders against the embedded Gross image.
    CesaroScan,
}

/// Comma-separated ladder from the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ladder(pub Vec<usize>);

fn parse_ladder(s: &str) -> Result<Ladder, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Ladder)
}

impl Cli {
    /// Configuration file plus flag overrides.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(o) = &self.out {
            c.output_dir = o.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(l) = &self.ladder {
            c.ladder = l.0.clone();
        }
        if let Some(t) = self.tol {
            if t.is_nan() || t < 0.0 {
                return Err(CliError::Config(format!("--tol {t} must be nonnegative")));
            }
            let tol = &mut c.tolerances;
            match self.command {
                Command::BasisCheck => tol.c1 = t,
                Command::Embed => tol.recovery = t,
                Command::Heat => tol.semigroup = t,
                Command::CesaroScan => tol.intertwining = t,
            }
        }
        if let Some(d) = &self.data {
            match self.command {
                Command::Embed => c.embed.coefficients = Some(d.clone()),
                Command::Heat | Command::CesaroScan => c.heat.initial = Some(d.clone()),
                Command::BasisCheck => {
                    return Err(CliError::Config("basis-check takes no --data".into()))
                }
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// Run one subcommand, returning the outcome or an error.
pub fn execute(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let config = cli.resolve()?;
    let out = ReportWriter::new(&config.output_dir, &config)?;
    match cli.command {
        Command::BasisCheck => commands::basis_check(&config, &out),
        Command::Embed => commands::embed(&config, &out),
        Command::Heat => commands::heat(&config, &out),
        Command::CesaroScan => commands::cesaro_scan(&config, &out),
    }
}

/// Run and report to stdout/stderr; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.pass {
                EXIT_PASS
            } else {
                eprintln!("tolerance check failed");
                EXIT_TOLERANCE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
