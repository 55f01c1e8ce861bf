use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use crate::error::CliResult;
use crate::manifest::sha256_file;

/// The files a command writes into its output directory. Every write goes
/// through here so the manifest can digest exactly what was produced.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    names: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            names: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn text(&mut self, name: &str, content: &str) -> CliResult<()> {
        fs::write(self.dir.join(name), content)?;
        self.names.push(name.to_string());
        Ok(())
    }

    pub fn csv<F>(&mut self, name: &str, header: &[&str], fill: F) -> CliResult<()>
    where
        F: FnOnce(&mut csv::Writer<File>) -> CliResult<()>,
    {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        fill(&mut w)?;
        w.flush()?;
        self.names.push(name.to_string());
        Ok(())
    }

    pub fn digests(&self) -> CliResult<BTreeMap<String, String>> {
        self.names
            .iter()
            .map(|n| Ok((n.clone(), sha256_file(&self.dir.join(n))?)))
            .collect()
    }
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}
