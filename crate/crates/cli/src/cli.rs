// Copyright 2026 The dotdfs Authors
// SPDX-License-Identifier: Apache-2.0

//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, ExperimentId};
use crate::error::CliError;
use crate::experiments::{self, RunReport};

/// Output directory used when neither `--out` nor the config's `output` is set.
pub const OUT_DIR_ENV: &str = "DOTDFS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "dotdfs", version, about = "Phonon decoherence of quantum-dot qubit registers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-dot relaxation rate against level splitting.
    Fig1(RunArgs),
    /// First-order decoherence rate against inter-dot spacing.
    Fig2(RunArgs),
    /// Fidelity trajectories for the configured spacing cases.
    Fig3(RunArgs),
    /// Write the correlation matrices of one device, optionally cross-checked
    /// by Monte-Carlo sampling.
    GammaDump(RunArgs),
    /// Evolve one initial state and write its trajectory.
    Evolve(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON experiment config; omitted keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config and $DOTDFS_OUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Integrator relative tolerance (overrides the config).
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Fig1(a) | Command::Fig2(a) | Command::Fig3(a) | Command::GammaDump(a) | Command::Evolve(a) => a,
        }
    }

    fn experiment(&self) -> Option<ExperimentId> {
        match self {
            Command::Fig1(_) => Some(ExperimentId::Fig1),
            Command::Fig2(_) => Some(ExperimentId::Fig2),
            Command::Fig3(_) => Some(ExperimentId::Fig3),
            Command::GammaDump(_) | Command::Evolve(_) => None,
        }
    }
}

/// Load the config named by `args`, apply command-line overrides and the
/// subcommand's experiment id, then materialise.
pub fn resolve_config(command: &Command) -> Result<ExperimentConfig, CliError> {
    let args = command.args();
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::read(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(id) = command.experiment() {
        match cfg.experiment {
            Some(found) if found != id => {
                return Err(CliError::Config {
                    field: "experiment".into(),
                    message: format!("config is for {} but the command runs {}", found.as_str(), id.as_str()),
                });
            }
            _ => cfg.experiment = Some(id),
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.integrator.rel_tol = tol;
    }
    cfg.materialize()
}

fn out_dir(args: &RunArgs, cfg: &ExperimentConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Run one subcommand to completion.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let cfg = resolve_config(&cli.command)?;
    let args = cli.command.args();
    let out = out_dir(args, &cfg);
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;

    let work = || match &cli.command {
        Command::Fig1(_) => experiments::run_fig1(&cfg, &out),
        Command::Fig2(_) => experiments::run_fig2(&cfg, &out),
        Command::Fig3(_) => experiments::run_fig3(&cfg, &out),
        Command::GammaDump(_) => experiments::run_gamma_dump(&cfg, &out),
        Command::Evolve(_) => experiments::run_evolve(&cfg, &out),
    };
    match args.threads {
        Some(0) => Err(CliError::Config {
            field: "--threads".into(),
            message: "must be >= 1".into(),
        }),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(work),
        None => work(),
    }
}
