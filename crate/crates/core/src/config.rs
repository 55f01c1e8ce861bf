//! `key = value` configuration files.
//!
//! The format is the flat subset of TOML: one assignment per line, `#`
//! comments, strings quoted. Unknown keys are rejected.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::SimScenario;
use crate::theory::OverfitParams;

pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
}

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        Error::ConfigParse(msg) => Error::ConfigParse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn render_config<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::ConfigParse(e.to_string()))
}

/// How true coefficient magnitudes are chosen in orthogonal-design runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MagnitudeProfile {
    /// Every nonzero coefficient equals `signal_scale`.
    Constant,
    /// The clustered coefficients of the default correlated scenario, scaled
    /// to unit-norm columns (`√n · β_j`) and multiplied by `signal_scale`.
    #[default]
    Calibrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryConfig {
    pub n: usize,
    pub m: usize,
    pub k0: usize,
    pub signal_scale: f64,
    pub profile: MagnitudeProfile,
    pub reps: usize,
    pub seed: u64,
    /// Randomized instances for the gap identity and `B_k` checks.
    pub gap_instances: usize,
    /// Number of coordinates in the gap-check instances.
    pub gap_m: usize,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            n: 800,
            m: 400,
            k0: 105,
            signal_scale: 1.0,
            profile: MagnitudeProfile::Calibrated,
            reps: 100,
            seed: 20040401,
            gap_instances: 1000,
            gap_m: 50,
        }
    }
}

impl TheoryConfig {
    /// Experiment parameters; the calibrated profile needs `k0` to match the
    /// nonzero count of the default scenario at this `n` and `m`.
    pub fn overfit_params(&self) -> Result<OverfitParams> {
        let profile = match self.profile {
            MagnitudeProfile::Constant => None,
            MagnitudeProfile::Calibrated => {
                let s = SimScenario {
                    n: self.n,
                    m: self.m,
                    ..SimScenario::default()
                };
                let truth = s.ground_truth()?;
                if truth.nonzero_set.len() != self.k0 {
                    return Err(Error::InvalidConfig(format!(
                        "calibrated profile has {} nonzero coefficients but k0 = {}",
                        truth.nonzero_set.len(),
                        self.k0
                    )));
                }
                let root_n = (self.n as f64).sqrt();
                Some(truth.nonzero_set.iter().map(|&j| root_n * truth.beta[j]).collect())
            }
        };
        Ok(OverfitParams {
            m: self.m,
            n: self.n,
            k0: self.k0,
            signal_scale: self.signal_scale,
            profile,
            reps: self.reps,
            seed: self.seed,
        })
    }
}
