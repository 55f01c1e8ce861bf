//! Run manifests: everything needed to re-execute a command, plus digests of
//! what it wrote.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::spec::RunSpec;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepSeed {
    pub rho: Option<f64>,
    pub rep: u64,
    /// Stream id of the data generator for this replication.
    pub data_stream: u64,
    /// Seed handed to the sampler, when one runs.
    pub chain_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command_line: Vec<String>,
    pub spec: RunSpec,
    /// Rendered configs, keyed by role (`scenario`, `svs`, `theory`).
    pub config_snapshots: BTreeMap<String, String>,
    pub seed: u64,
    pub rep_seeds: Vec<RepSeed>,
    pub started_unix_secs: u64,
    pub wall_clock_secs: f64,
    /// sha256 of every output file, by file name.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad manifest {}: {e}", path.display())))
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }

    /// Recompute digests of the listed outputs in `dir`; returns the names
    /// whose content no longer matches.
    pub fn verify(&self, dir: &Path) -> CliResult<Vec<String>> {
        let mut bad = Vec::new();
        for (name, digest) in &self.outputs {
            let p = dir.join(name);
            if !p.exists() || sha256_file(&p)? != *digest {
                bad.push(name.clone());
            }
        }
        Ok(bad)
    }
}
