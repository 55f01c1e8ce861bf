//! `cpbench`: command-line front end for the Cp variable-selection
//! benchmarks. Every command writes its files plus a `manifest.json` that is
//! enough to re-run it and check the outputs byte for byte.

pub mod args;
pub mod bench_cmd;
pub mod diabetes;
pub mod error;
pub mod manifest;
pub mod outputs;
pub mod report;
pub mod simulate_cmd;
pub mod spec;
pub mod theory_cmd;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use cpbench_core::config::{load_config, render_config, TheoryConfig};
use cpbench_core::{SimScenario, SvsConfig};

use crate::args::{Cli, Command, Common};
pub use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_file, RunManifest, MANIFEST_FILE};
use crate::outputs::Outputs;
use crate::spec::{CommandKind, ModelChoice, RhoChoice, RunSpec};

/// Parse `argv` (program name first), run, and map the outcome to an exit
/// code.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let command_line: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli, command_line) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cpbench: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, command_line: Vec<String>) -> CliResult<()> {
    match cli.command {
        Command::Replay { manifest, out } => {
            let mismatched = replay(&manifest, &out)?;
            if mismatched.is_empty() {
                println!("replay matches {}", manifest.display());
                Ok(())
            } else {
                Err(CliError::Invariant(format!(
                    "outputs differ from the manifest: {}",
                    mismatched.join(", ")
                )))
            }
        }
        other => {
            let (spec, out) = resolve(other)?;
            let m = execute(&spec, &out, command_line)?;
            println!(
                "wrote {} file(s) and {} to {}",
                m.outputs.len(),
                MANIFEST_FILE,
                out.display()
            );
            Ok(())
        }
    }
}

fn load<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    Ok(match path {
        Some(p) => load_config(p)?,
        None => T::default(),
    })
}

/// Turn parsed arguments into a complete run description.
pub fn resolve(command: Command) -> CliResult<(RunSpec, PathBuf)> {
    let (kind, common, rho, model, csv, flatness) = match command {
        Command::Table1 { common, rho } => (CommandKind::Table1, common, rho, ModelChoice::Main, None, 0.05),
        Command::CpCurves { common, rho, flatness } => {
            (CommandKind::CpCurves, common, rho, ModelChoice::Main, None, flatness)
        }
        Command::Diabetes { common, csv, model } => {
            (CommandKind::Diabetes, common, RhoChoice::Zero, model, Some(csv), 0.05)
        }
        Command::Theory { common } => (
            CommandKind::Theory,
            common,
            RhoChoice::Zero,
            ModelChoice::Main,
            None,
            0.05,
        ),
        Command::Simulate { common, rho } => (CommandKind::Simulate, common, rho, ModelChoice::Main, None, 0.05),
        Command::Replay { .. } => unreachable!("replay is handled before resolution"),
    };
    if !(flatness > 0.0 && flatness < 1.0) {
        return Err(CliError::Usage(format!(
            "--flatness must lie in (0, 1), got {flatness}"
        )));
    }
    let Common {
        config,
        svs_config,
        seed,
        reps,
        out,
    } = common;

    let mut svs: SvsConfig = load(svs_config.as_deref())?;
    let mut scenario = SimScenario::default();
    let mut theory = TheoryConfig::default();
    match kind {
        CommandKind::Theory => theory = load(config.as_deref())?,
        CommandKind::Diabetes => {
            if config.is_some() {
                return Err(CliError::Usage(
                    "diabetes takes sampler settings from --svs-config only".into(),
                ));
            }
        }
        _ => scenario = load(config.as_deref())?,
    }

    let seed = match kind {
        CommandKind::Theory => {
            theory.seed = seed.unwrap_or(theory.seed);
            theory.seed
        }
        CommandKind::Diabetes => {
            svs.seed = seed.unwrap_or(svs.seed);
            svs.seed
        }
        _ => {
            scenario.seed = seed.unwrap_or(scenario.seed);
            scenario.seed
        }
    };
    let reps = match kind {
        CommandKind::Theory => {
            theory.reps = reps.unwrap_or(theory.reps);
            theory.reps
        }
        CommandKind::Simulate => reps.unwrap_or(1),
        CommandKind::Diabetes => 1,
        _ => reps.unwrap_or(scenario.reps),
    };
    if reps == 0 {
        return Err(CliError::Usage("reps must be at least 1".into()));
    }
    scenario.reps = reps;
    scenario.validate()?;

    // absolute, so a replay from another directory finds the same file
    let csv = match csv {
        Some(p) => Some(
            p.canonicalize()
                .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let csv_sha256 = match &csv {
        Some(p) => Some(sha256_file(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?),
        None => None,
    };
    Ok((
        RunSpec {
            command: kind,
            seed,
            reps,
            rho,
            model,
            scenario,
            svs,
            theory,
            csv,
            csv_sha256,
            flatness,
        },
        out,
    ))
}

fn snapshots(spec: &RunSpec) -> CliResult<BTreeMap<String, String>> {
    let mut s = BTreeMap::new();
    match spec.command {
        CommandKind::Theory => {
            s.insert("theory".into(), render_config(&spec.theory)?);
        }
        CommandKind::Diabetes => {
            s.insert("svs".into(), render_config(&spec.svs)?);
        }
        CommandKind::Simulate => {
            s.insert("scenario".into(), render_config(&spec.scenario)?);
        }
        CommandKind::Table1 | CommandKind::CpCurves => {
            s.insert("scenario".into(), render_config(&spec.scenario)?);
            s.insert("svs".into(), render_config(&spec.svs)?);
        }
    }
    Ok(s)
}

/// Run a resolved command into `out_dir` and write its manifest.
pub fn execute(spec: &RunSpec, out_dir: &Path, command_line: Vec<String>) -> CliResult<RunManifest> {
    let started = Instant::now();
    let started_unix_secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut out = Outputs::create(out_dir)?;
    let rep_seeds = match spec.command {
        CommandKind::Table1 => bench_cmd::table1(spec, &mut out)?,
        CommandKind::CpCurves => bench_cmd::cp_curves(spec, &mut out)?,
        CommandKind::Diabetes => diabetes::run(spec, &mut out)?,
        CommandKind::Theory => theory_cmd::run(spec, &mut out)?,
        CommandKind::Simulate => simulate_cmd::run(spec, &mut out)?,
    };
    let manifest = RunManifest {
        tool: "cpbench".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command_line,
        spec: spec.clone(),
        config_snapshots: snapshots(spec)?,
        seed: spec.seed,
        rep_seeds,
        started_unix_secs,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        outputs: out.digests()?,
    };
    manifest.write(out.dir())?;
    Ok(manifest)
}

/// Re-run the command recorded in `manifest_path` into `out_dir`; returns the
/// output files whose digests differ from the recorded ones.
pub fn replay(manifest_path: &Path, out_dir: &Path) -> CliResult<Vec<String>> {
    let recorded = RunManifest::load(manifest_path)?;
    if let (Some(csv), Some(digest)) = (&recorded.spec.csv, &recorded.spec.csv_sha256) {
        let now = sha256_file(csv).map_err(|e| CliError::Data(format!("{}: {e}", csv.display())))?;
        if now != *digest {
            return Err(CliError::Data(format!(
                "{} changed since the recorded run",
                csv.display()
            )));
        }
    }
    let fresh = execute(&recorded.spec, out_dir, recorded.command_line.clone())?;
    let mut bad: Vec<String> = recorded
        .outputs
        .iter()
        .filter(|(name, digest)| fresh.outputs.get(*name) != Some(digest))
        .map(|(name, _)| name.clone())
        .collect();
    bad.extend(
        fresh
            .outputs
            .keys()
            .filter(|n| !recorded.outputs.contains_key(*n))
            .cloned(),
    );
    Ok(bad)
}
