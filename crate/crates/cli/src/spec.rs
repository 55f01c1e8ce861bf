//! A fully resolved invocation: config files read, overrides applied.

use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use cpbench_core::config::TheoryConfig;
use cpbench_core::{SimScenario, SvsConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Table1,
    CpCurves,
    Diabetes,
    Theory,
    Simulate,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CommandKind::Table1 => "table1",
            CommandKind::CpCurves => "cp-curves",
            CommandKind::Diabetes => "diabetes",
            CommandKind::Theory => "theory",
            CommandKind::Simulate => "simulate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum RhoChoice {
    #[value(name = "0")]
    #[serde(rename = "0")]
    Zero,
    #[value(name = "0.9")]
    #[serde(rename = "0.9")]
    High,
    #[value(name = "both")]
    #[serde(rename = "both")]
    Both,
}

impl RhoChoice {
    pub fn values(self) -> Vec<f64> {
        match self {
            RhoChoice::Zero => vec![0.0],
            RhoChoice::High => vec![0.9],
            RhoChoice::Both => vec![0.0, 0.9],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Main,
    Quadratic,
}

impl fmt::Display for ModelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelChoice::Main => "main",
            ModelChoice::Quadratic => "quadratic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub command: CommandKind,
    pub seed: u64,
    pub reps: usize,
    pub rho: RhoChoice,
    pub model: ModelChoice,
    pub scenario: SimScenario,
    pub svs: SvsConfig,
    pub theory: TheoryConfig,
    pub csv: Option<PathBuf>,
    pub csv_sha256: Option<String>,
    /// Relative Cp spread below which a curve counts as flat.
    pub flatness: f64,
}

/// Label used in file names and tables, `0` or `0.9`.
pub fn rho_label(rho: f64) -> String {
    format!("{rho}")
}
