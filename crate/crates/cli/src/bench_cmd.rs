//! `table1` and `cp-curves`: replicated runs of the simulated design.

use std::collections::BTreeMap;
use std::fmt::Write;

use cpbench_core::bench::{run_scenario, ScenarioRun};
use cpbench_core::metrics::MetricsRow;
use cpbench_core::sim::Stream;
use cpbench_core::{BenchMethod, CpCurve};

use crate::error::{CliError, CliResult};
use crate::manifest::RepSeed;
use crate::outputs::{num, Outputs};
use crate::report;
use crate::spec::{rho_label, RunSpec};

pub fn run_all(spec: &RunSpec) -> CliResult<Vec<(f64, ScenarioRun)>> {
    spec.rho
        .values()
        .into_iter()
        .map(|rho| {
            let scenario = spec.scenario.with_rho(rho);
            log::info!("rho = {rho}: {} replication(s)", spec.reps);
            let run = run_scenario(&scenario, &spec.svs, spec.reps)?;
            if run.results.is_empty() {
                return Err(CliError::Data(format!("every replication failed at rho = {rho}")));
            }
            Ok((rho, run))
        })
        .collect()
}

pub fn rep_seeds(runs: &[(f64, ScenarioRun)]) -> Vec<RepSeed> {
    let mut out = Vec::new();
    for (rho, run) in runs {
        for r in &run.results {
            out.push(RepSeed {
                rho: Some(*rho),
                rep: r.rep,
                data_stream: Stream::Data(r.rep).id(),
                chain_seed: Some(r.chain_seed),
            });
        }
    }
    out
}

pub fn table1(spec: &RunSpec, out: &mut Outputs) -> CliResult<Vec<RepSeed>> {
    let runs = run_all(spec)?;
    let blocks: Vec<(f64, Vec<MetricsRow>, usize)> = runs
        .iter()
        .map(|(rho, run)| (*rho, run.table(), run.failures.len()))
        .collect();

    out.csv(
        "table1_metrics.csv",
        &[
            "rho",
            "method",
            "reps",
            "failed",
            "m_hat",
            "m_hat_se",
            "pe",
            "pe_se",
            "total_miss",
            "total_miss_se",
            "fdr",
            "fdr_se",
            "fnr",
            "fnr_se",
        ],
        |w| {
            for (rho, rows, failed) in &blocks {
                for r in rows {
                    let mut rec = vec![
                        rho_label(*rho),
                        r.method.label().to_string(),
                        r.reps.to_string(),
                        failed.to_string(),
                    ];
                    for ms in [r.m_hat, r.pe, r.total_miss, r.fdr, r.fnr] {
                        rec.push(num(ms.mean));
                        rec.push(num(ms.se));
                    }
                    w.write_record(&rec)?;
                }
            }
            Ok(())
        },
    )?;

    out.csv(
        "table1_replications.csv",
        &[
            "rho",
            "rep",
            "method",
            "m_hat",
            "pe",
            "total_miss",
            "fdr",
            "fnr",
            "tp",
            "fp",
            "tn",
            "fn",
            "sigma2_hat",
        ],
        |w| {
            for (rho, run) in &runs {
                for r in &run.results {
                    for m in &r.metrics {
                        let c = m.counts;
                        w.write_record([
                            rho_label(*rho),
                            r.rep.to_string(),
                            m.method.label().to_string(),
                            m.m_hat.to_string(),
                            num(m.pe),
                            c.total_miss().to_string(),
                            num(c.fdr()),
                            num(c.fnr()),
                            c.tp.to_string(),
                            c.fp.to_string(),
                            c.tn.to_string(),
                            c.fn_.to_string(),
                            num(r.sigma2),
                        ])?;
                    }
                }
            }
            Ok(())
        },
    )?;

    let mut text = report::metrics_table(&blocks);
    for (rho, run) in &runs {
        for (rep, msg) in &run.failures {
            let _ = writeln!(text, "rho = {rho}, replication {rep} failed: {msg}");
        }
    }
    if runs.iter().all(|(_, run)| report::has_reference(&run.scenario)) {
        text.push_str(&report::reference_comparison(&blocks));
    }
    out.text("table1.txt", &text)?;
    Ok(rep_seeds(&runs))
}

/// Mean and sd of Cp at each k over the replications whose curve reaches k.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub k: usize,
    pub reps: usize,
    pub mean: f64,
    pub sd: f64,
}

pub fn summarize_curves(curves: &[&CpCurve]) -> Vec<CurveSummary> {
    let mut by_k: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for c in curves {
        for e in &c.entries {
            by_k.entry(e.k).or_default().push(e.cp);
        }
    }
    by_k.into_iter()
        .map(|(k, v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let sd = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            CurveSummary {
                k,
                reps: v.len(),
                mean,
                sd,
            }
        })
        .collect()
}

/// Minimizer of a mean curve and how flat it is just past the minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport {
    pub k_min: usize,
    pub min_mean: f64,
    /// Spread of the mean over `[k_min, k_min + window]` divided by the spread
    /// over the whole curve.
    pub relative_spread: f64,
}

pub fn flatness(curve: &[CurveSummary], window: usize) -> FlatnessReport {
    let (imin, min) =
        curve.iter().enumerate().fold(
            (0, f64::INFINITY),
            |(bi, bv), (i, c)| if c.mean < bv { (i, c.mean) } else { (bi, bv) },
        );
    let k_min = curve[imin].k;
    let max_all = curve.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max);
    let max_win = curve
        .iter()
        .filter(|c| c.k >= k_min && c.k <= k_min + window)
        .map(|c| c.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    let range = max_all - min;
    FlatnessReport {
        k_min,
        min_mean: min,
        relative_spread: if range > 0.0 { (max_win - min) / range } else { 0.0 },
    }
}

pub const FLATNESS_WINDOW: usize = 50;

type CurveOf = fn(&cpbench_core::bench::RepResult) -> &CpCurve;

pub fn cp_curves(spec: &RunSpec, out: &mut Outputs) -> CliResult<Vec<RepSeed>> {
    let runs = run_all(spec)?;
    let mut summaries: Vec<(f64, BenchMethod, Vec<CurveSummary>)> = Vec::new();
    for (rho, run) in &runs {
        let pick: [(BenchMethod, CurveOf); 3] = [
            (BenchMethod::Lars, |r| &r.lars_curve),
            (BenchMethod::SvsCp, |r| &r.svs_curve),
            (BenchMethod::Step, |r| &r.step_curve),
        ];
        for (method, get) in pick {
            let curves: Vec<&CpCurve> = run.results.iter().map(get).collect();
            summaries.push((*rho, method, summarize_curves(&curves)));
        }
    }

    out.csv(
        "cp_curves.csv",
        &["rho", "method", "k", "reps", "mean_cp", "sd_cp"],
        |w| {
            for (rho, method, curve) in &summaries {
                for c in curve {
                    w.write_record([
                        rho_label(*rho),
                        method.label().to_string(),
                        c.k.to_string(),
                        c.reps.to_string(),
                        num(c.mean),
                        num(c.sd),
                    ])?;
                }
            }
            Ok(())
        },
    )?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "flat: spread of the mean curve over [k_min, k_min + {FLATNESS_WINDOW}] below {} of its full range",
        spec.flatness
    );
    let _ = writeln!(text, "near zero: minimum mean Cp below 0.1 m\n");
    let _ = writeln!(
        text,
        "{:<6}{:<8}{:>8}{:>14}{:>16}{:>7}{:>11}",
        "rho", "method", "k_min", "min_mean_cp", "rel_spread", "flat", "near_zero"
    );
    for (rho, method, curve) in &summaries {
        let f = flatness(curve, FLATNESS_WINDOW);
        let near_zero = f.min_mean < 0.1 * spec.scenario.m as f64;
        let _ = writeln!(
            text,
            "{:<6}{:<8}{:>8}{:>14.3}{:>16.4}{:>7}{:>11}",
            rho_label(*rho),
            method.label(),
            f.k_min,
            f.min_mean,
            f.relative_spread,
            if f.relative_spread < spec.flatness { "yes" } else { "no" },
            if near_zero { "yes" } else { "no" },
        );
    }
    out.text("cp_curves_summary.txt", &text)?;
    Ok(rep_seeds(&runs))
}
