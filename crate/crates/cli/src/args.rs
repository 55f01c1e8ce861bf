use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::spec::{ModelChoice, RhoChoice};

#[derive(Debug, Parser)]
#[command(name = "cpbench", version, about = "Cp-based variable selection benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario (or theory) config file, `key = value` lines.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Sampler config file.
    #[arg(long, value_name = "PATH")]
    pub svs_config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Number of replications; overrides the config file.
    #[arg(long, value_name = "N", value_parser = parse_reps)]
    pub reps: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "cpbench-out")]
    pub out: PathBuf,
}

fn parse_reps(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Four-method comparison on the simulated design.
    Table1 {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "both")]
        rho: RhoChoice,
    },
    /// Mean and sd of Cp curves across replications.
    CpCurves {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "both")]
        rho: RhoChoice,
        /// Relative spread threshold for calling a curve flat near its minimum.
        #[arg(long, default_value_t = 0.05)]
        flatness: f64,
    },
    /// LARS and SVS Cp curves on a diabetes-style CSV.
    Diabetes {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "main")]
        model: ModelChoice,
    },
    /// Orthogonal-design experiments on Cp overfitting.
    Theory {
        #[command(flatten)]
        common: Common,
    },
    /// Write simulated datasets and their true coefficients.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "0")]
        rho: RhoChoice,
    },
    /// Re-run the command recorded in a manifest and compare digests.
    Replay {
        #[arg(value_name = "MANIFEST")]
        manifest: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}
