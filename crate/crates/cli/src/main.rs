//! `warpcone`: runs one verification experiment and writes a JSON report.
//!
//! Exit status is 0 when the check passes, 1 when it fails and 2 on usage or
//! input errors.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod plot;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use env_logger::Env;

use config::Flags;

#[derive(Parser)]
#[command(version, about = "Curvature-dimension experiments on cones and warped products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Eigenvalues of the radial operator on (I_K, sin_K^ν) and the spectral-gap bound
    Spectrum,
    /// Builds the (K, N)-cone over a fiber space and writes it as JSON
    Cone,
    /// Midpoint CD*/CD inequality over density pairs
    CdCheck,
    /// Bakry–Émery check on a graph, or the sharp Γ₂ estimate on a warped cone
    BeCheck,
    /// Limit-point / limit-circle table and essential self-adjointness
    Weyl,
    /// Recognizes a spherical suspension
    Suspension,
    /// Heat flow and the Bakry–Ledoux gradient estimate on the model
    Heat,
    /// Finite-difference check of the warped Γ₂ product formula
    Gamma2Identity,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let cfg = cli.flags.into_config()?;
    let started = Instant::now();
    let mut report = match cli.command {
        Command::Spectrum => commands::spectrum::run(cfg)?,
        Command::Cone => return commands::cone::run(cfg).map(|_| true),
        Command::CdCheck => commands::cd::run(cfg)?,
        Command::BeCheck => commands::be::run(cfg)?,
        Command::Weyl => commands::weyl::run(cfg)?,
        Command::Suspension => commands::suspension::run(cfg)?,
        Command::Heat => commands::heat::run(cfg)?,
        Command::Gamma2Identity => commands::identity::run(cfg)?,
    };
    report.runtime_ms = started.elapsed().as_millis() as u64;
    report.emit()?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
