//! Text tables and the published reference values for the default design.

use std::fmt::Write;

use cpbench_core::metrics::MetricsRow;
use cpbench_core::{BenchMethod, SimScenario};

/// Published means for the default design: m̂, pe, TotalMiss, FDR, FNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub rho: f64,
    pub method: BenchMethod,
    pub values: [f64; 5],
}

pub const REFERENCE: [ReferenceRow; 8] = [
    ReferenceRow {
        rho: 0.0,
        method: BenchMethod::Lars,
        values: [210.69, 0.907, 126.63, 0.547, 0.055],
    },
    ReferenceRow {
        rho: 0.0,
        method: BenchMethod::SvsCp,
        values: [126.66, 0.887, 61.14, 0.323, 0.072],
    },
    ReferenceRow {
        rho: 0.0,
        method: BenchMethod::SvsBma,
        values: [400.0, 0.918, 295.0, 0.737, 0.0],
    },
    ReferenceRow {
        rho: 0.0,
        method: BenchMethod::Step,
        values: [135.53, 0.876, 70.35, 0.367, 0.075],
    },
    ReferenceRow {
        rho: 0.9,
        method: BenchMethod::Lars,
        values: [99.51, 0.962, 75.77, 0.347, 0.135],
    },
    ReferenceRow {
        rho: 0.9,
        method: BenchMethod::SvsCp,
        values: [58.86, 0.952, 66.38, 0.153, 0.164],
    },
    ReferenceRow {
        rho: 0.9,
        method: BenchMethod::SvsBma,
        values: [400.0, 0.966, 295.0, 0.737, 0.0],
    },
    ReferenceRow {
        rho: 0.9,
        method: BenchMethod::Step,
        values: [129.24, 0.884, 137.10, 0.552, 0.208],
    },
];

pub fn reference(rho: f64, method: BenchMethod) -> Option<&'static ReferenceRow> {
    REFERENCE.iter().find(|r| r.rho == rho && r.method == method)
}

/// The reference values only describe the default design; seed and
/// replication count may differ.
pub fn has_reference(s: &SimScenario) -> bool {
    let d = SimScenario::default();
    s.n == d.n
        && s.m == d.m
        && s.spacing == d.spacing
        && s.h == d.h
        && s.exponent == d.exponent
        && s.r2 == d.r2
        && s.sigma2 == d.sigma2
        && s.shape == d.shape
        && (s.rho == 0.0 || s.rho == 0.9)
}

fn row_values(r: &MetricsRow) -> [f64; 5] {
    [r.m_hat.mean, r.pe.mean, r.total_miss.mean, r.fdr.mean, r.fnr.mean]
}

fn row_ses(r: &MetricsRow) -> [f64; 5] {
    [r.m_hat.se, r.pe.se, r.total_miss.se, r.fdr.se, r.fnr.se]
}

const COLUMNS: [&str; 5] = ["m_hat", "pe", "TotalMiss", "FDR", "FNR"];

fn cell(i: usize, v: f64) -> String {
    // counts in two decimals, rates in three
    if i == 0 || i == 2 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

/// One block per ρ: means with standard errors in parentheses.
pub fn metrics_table(blocks: &[(f64, Vec<MetricsRow>, usize)]) -> String {
    let mut out = String::new();
    for (rho, rows, failed) in blocks {
        let _ = writeln!(out, "rho = {rho}");
        let _ = write!(out, "{:<8}{:>6}", "method", "reps");
        for c in COLUMNS {
            let _ = write!(out, "{c:>20}");
        }
        out.push('\n');
        for r in rows {
            let _ = write!(out, "{:<8}{:>6}", r.method.label(), r.reps);
            for (i, (v, se)) in row_values(r).iter().zip(row_ses(r)).enumerate() {
                let _ = write!(out, "{:>20}", format!("{} ({})", cell(i, *v), cell(i, se)));
            }
            out.push('\n');
        }
        if *failed > 0 {
            let _ = writeln!(out, "{failed} replication(s) failed and are excluded");
        }
        out.push('\n');
    }
    out
}

/// Observed minus reference for each cell, when the design has reference
/// values.
pub fn reference_comparison(blocks: &[(f64, Vec<MetricsRow>, usize)]) -> String {
    let mut out = String::from("Deviation from reference values (observed - reference)\n");
    for (rho, rows, _) in blocks {
        let _ = writeln!(out, "rho = {rho}");
        let _ = write!(out, "{:<8}", "method");
        for c in COLUMNS {
            let _ = write!(out, "{c:>24}");
        }
        out.push('\n');
        for r in rows {
            let Some(refr) = reference(*rho, r.method) else {
                continue;
            };
            let _ = write!(out, "{:<8}", r.method.label());
            for (i, (v, rv)) in row_values(r).iter().zip(refr.values).enumerate() {
                let _ = write!(
                    out,
                    "{:>24}",
                    format!("{} vs {} ({:+.3})", cell(i, *v), cell(i, rv), v - rv)
                );
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
