//! Command-line driver: parses a run configuration, executes one pipeline
//! and writes its data, plots and manifest into an output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use su11::exec::{available_workers, with_workers, Schedule};

use crate::commands::{execute, Manifest, Pipeline, Run};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutDir;

#[derive(Debug, Parser)]
#[command(name = "su11", version, about = "Transfer functions, Schmidt modes and squeezing of SU(1,1) interferometers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for independent jobs (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Reserved; every pipeline is deterministic. Echoed in the manifest.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Fit the collinear photon number against the coupling.
    Calibrate,
    /// Schmidt modes, gains and the c overlap of one crystal.
    SingleCrystal,
    /// Visibility, fringes and g / h overlaps of the interferometer.
    Interferometer,
    /// Interferometer with the air gap optimized over the configured sweep.
    SweepDeltaz,
    /// Direct, exact and high-gain squeezing per mode.
    Squeezing,
    /// Asymmetry of |B| and a separable fit of its phase.
    Asymmetry,
}

impl Command {
    fn pipeline(self) -> Pipeline {
        match self {
            Command::Calibrate => Pipeline::Calibrate,
            Command::SingleCrystal => Pipeline::SingleCrystal,
            Command::Interferometer => Pipeline::Interferometer,
            Command::SweepDeltaz => Pipeline::SweepDeltaz,
            Command::Squeezing => Pipeline::Squeezing,
            Command::Asymmetry => Pipeline::Asymmetry,
        }
    }
}

/// Run one parsed invocation; returns the list of written files.
pub fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let config = RunConfig::from_path(path)?;
    let pipeline = cli.command.pipeline();
    with_workers(cli.workers, || {
        let mut run = Run {
            config: &config,
            setup: config.setup()?,
            schedule: if cli.workers == 1 { Schedule::Sequential } else { Schedule::Parallel },
            out: OutDir::create(&cli.out)?,
            warnings: Vec::new(),
            slope: None,
        };
        execute(&mut run, pipeline)?;
        let mut outputs = run.out.written().to_vec();
        outputs.push("manifest.json".into());
        let manifest = Manifest {
            program: "su11",
            version: env!("CARGO_PKG_VERSION"),
            command: pipeline.name(),
            seed: cli.seed,
            workers: if cli.workers == 0 { available_workers() } else { cli.workers },
            config: &config,
            slope: run.slope.clone(),
            warnings: run.warnings.clone(),
            outputs: outputs.clone(),
        };
        run.out.json("manifest.json", &manifest)?;
        Ok(outputs)
    })
}
