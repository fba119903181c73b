//! Batch experiments for the damped wave problem: forward runs,
//! damping reconstruction, stability sweeps and the verification suite.
//!
//! Every command writes its artifacts plus a `manifest.json` (written last)
//! into the output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod svg;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_forward, cmd_reconstruct, cmd_sweep};
pub use config::ExperimentConfig;
pub use error::CliError;
pub use verify::cmd_verify;

#[derive(Debug, Parser)]
#[command(name = "dampwave", version, about = "Boundary damping experiments on the unit square")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for generated test vectors (overrides `seed`).
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve from a mode and write energy, trace and decay fit.
    Forward(CommonArgs),
    /// Recover the damping from a modal probe.
    Reconstruct(CommonArgs),
    /// Stability sweep over a scaled damping family.
    Sweep(CommonArgs),
    /// Run the numerical check suite.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Only run checks whose name starts with this prefix.
        #[arg(long, value_name = "PREFIX")]
        filter: Option<String>,
    },
}

pub fn resolve_config(args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Execute a parsed command line, printing a short report to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Forward(args) => {
            let s = cmd_forward(&resolve_config(&args)?)?;
            println!(
                "forward: {} steps, energy {:.6e} -> {:.6e}, omega_fit {:.6}",
                s.steps, s.initial_energy, s.final_energy, s.omega_fit
            );
        }
        Command::Reconstruct(args) => {
            let s = cmd_reconstruct(&resolve_config(&args)?)?;
            println!("reconstruct: linearized relative error {:.4}", s.linearized_rel_error);
            if let (Some(e), Some(r)) = (s.lsq_rel_error, s.lsq_residual_reduction) {
                println!("reconstruct: least squares relative error {e:.4}, residual reduced by {:.1}%", 100.0 * r);
            }
            for f in &s.flags {
                println!("reconstruct: {f}");
            }
        }
        Command::Sweep(args) => {
            let s = cmd_sweep(&resolve_config(&args)?)?;
            println!(
                "sweep: {} members, delta monotone {}, bound holds {}, N0 bracketed {}",
                s.members, s.delta_monotone, s.bound_holds, s.n0_bracketed
            );
        }
        Command::Verify { common, filter } => {
            let report = cmd_verify(&resolve_config(&common)?, filter.as_deref())?;
            print!("{}", report.table());
            let failed = report.failed();
            if !failed.is_empty() {
                return Err(CliError::Checks(failed));
            }
        }
    }
    Ok(())
}
