//! Diabetes-style CSV analysis: main-effects or quadratic design, LARS and
//! SVS ranked Cp curves.

use std::collections::HashSet;
use std::fmt::Write;
use std::fs::File;
use std::path::Path;

use cpbench_core::bench::fit_all;
use cpbench_core::io::{read_numeric_table, NumericTable};
use cpbench_core::model::column_major;
use cpbench_core::{standardize, CpCurve, Dataset, Error as CoreError, Selection};
use ndarray::{Array1, Array2};

use crate::error::{CliError, CliResult};
use crate::manifest::RepSeed;
use crate::outputs::{num, Outputs};
use crate::spec::{ModelChoice, RunSpec};

/// Canonical covariate names, in design order, with accepted header aliases.
pub const COVARIATES: [(&str, &[&str]); 10] = [
    ("age", &["age", "AGE"]),
    ("sex", &["sex", "SEX"]),
    ("bmi", &["bmi", "BMI"]),
    ("map", &["map", "MAP", "bp", "BP"]),
    ("tc", &["tc", "TC", "s1", "S1"]),
    ("ldl", &["ldl", "LDL", "s2", "S2"]),
    ("hdl", &["hdl", "HDL", "s3", "S3"]),
    ("tch", &["tch", "TCH", "s4", "S4"]),
    ("ltg", &["ltg", "LTG", "s5", "S5"]),
    ("glu", &["glu", "GLU", "s6", "S6"]),
];
pub const RESPONSE: &[&str] = &["y", "Y", "target"];

fn find_column(t: &NumericTable, aliases: &[&str]) -> Option<usize> {
    aliases.iter().find_map(|a| t.header.iter().position(|h| h == a))
}

/// The ten covariates and the response, raw, with canonical names.
pub fn load_diabetes(path: &Path) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let table = read_numeric_table(file)?;
    let mut cols = Vec::with_capacity(10);
    for (name, aliases) in COVARIATES {
        cols.push(find_column(&table, aliases).ok_or_else(|| CliError::Data(format!("missing column {name:?}")))?);
    }
    let resp = find_column(&table, RESPONSE).ok_or_else(|| CliError::Data("missing column \"y\"".into()))?;
    let d = cpbench_core::io::dataset_from_table(&table, &cols, resp)?;
    Ok(d.with_names(COVARIATES.iter().map(|(n, _)| n.to_string()).collect())?)
}

fn is_binary(col: &[f64]) -> bool {
    let mut first = None;
    let mut second = None;
    for &v in col {
        match (first, second) {
            (None, _) => first = Some(v),
            (Some(a), None) if v != a => second = Some(v),
            (Some(a), Some(b)) if v != a && v != b => return false,
            _ => {}
        }
    }
    second.is_some()
}

/// Main effects, then all pairwise products `a.b` (i < j), then squares `a.2`
/// of the non-binary columns.
pub fn quadratic_expansion(x: &Array2<f64>, names: &[String]) -> Result<(Array2<f64>, Vec<String>), CoreError> {
    let m = x.ncols();
    if names.len() != m {
        return Err(CoreError::InvalidData(format!("{} names for {m} columns", names.len())));
    }
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(CoreError::InvalidData(format!("duplicate column name {n:?}")));
        }
    }
    let mains: Vec<Vec<f64>> = (0..m).map(|j| x.column(j).to_vec()).collect();
    let mut cols = mains.clone();
    let mut out_names = names.to_vec();
    for i in 0..m {
        for j in i + 1..m {
            cols.push(mains[i].iter().zip(&mains[j]).map(|(a, b)| a * b).collect());
            out_names.push(format!("{}.{}", names[i], names[j]));
        }
    }
    for i in 0..m {
        if !is_binary(&mains[i]) {
            cols.push(mains[i].iter().map(|a| a * a).collect());
            out_names.push(format!("{}.2", names[i]));
        }
    }
    Ok((column_major(x.nrows(), &cols), out_names))
}

/// Design for the requested model; quadratic terms are built from
/// standardized main effects.
pub fn design(d: &Dataset, model: ModelChoice) -> CliResult<Dataset> {
    match model {
        ModelChoice::Main => Ok(d.clone()),
        ModelChoice::Quadratic => {
            let s = standardize(d)?;
            let n = d.n();
            let mains: Vec<Vec<f64>> = (0..d.m()).map(|j| s.column(j).to_vec()).collect();
            let names: Vec<String> = (0..d.m()).map(|j| s.name(j)).collect();
            let (x, names) = quadratic_expansion(&column_major(n, &mains), &names)?;
            if n <= x.ncols() + 1 {
                return Err(CliError::Data(format!(
                    "quadratic model has {} columns but only {n} rows",
                    x.ncols()
                )));
            }
            Ok(Dataset::new(x, d.y.clone())?.with_names(names)?)
        }
    }
}

pub struct DiabetesFit {
    pub names: Vec<String>,
    pub n: usize,
    pub sigma2: f64,
    pub lars_curve: CpCurve,
    pub lars_selection: Selection,
    pub lars_order: Vec<usize>,
    pub svs_curve: CpCurve,
    pub svs_selection: Selection,
    pub ranking: Vec<usize>,
    pub post_mean: Array1<f64>,
    pub inclusion: Array1<f64>,
}

pub fn analyze(d: &Dataset, spec: &RunSpec) -> CliResult<DiabetesFit> {
    let design = design(d, spec.model)?;
    let s = standardize(&design)?;
    let fits = fit_all(&s, &spec.svs, None)?;
    Ok(DiabetesFit {
        names: (0..s.m()).map(|j| s.name(j)).collect(),
        n: s.n(),
        sigma2: fits.sigma2,
        lars_order: fits.lars.last().active.clone(),
        lars_curve: fits.lars_curve,
        lars_selection: fits.lars_selection,
        svs_curve: fits.svs_curve,
        svs_selection: fits.svs_selection,
        ranking: fits.ranking,
        post_mean: fits.posterior.post_mean_beta,
        inclusion: fits.posterior.inclusion_freq,
    })
}

fn write_curve(out: &mut Outputs, name: &str, c: &CpCurve) -> CliResult<()> {
    out.csv(name, &["k", "rss", "cp"], |w| {
        for e in &c.entries {
            w.write_record([e.k.to_string(), num(e.rss), num(e.cp)])?;
        }
        Ok(())
    })
}

pub fn run(spec: &RunSpec, out: &mut Outputs) -> CliResult<Vec<RepSeed>> {
    let path = spec
        .csv
        .as_ref()
        .ok_or_else(|| CliError::Usage("diabetes needs --csv".into()))?;
    let d = load_diabetes(path)?;
    let fit = analyze(&d, spec)?;
    let tag = spec.model.to_string();
    let names = &fit.names;

    write_curve(out, &format!("diabetes_{tag}_lars_cp.csv"), &fit.lars_curve)?;
    write_curve(out, &format!("diabetes_{tag}_svs_cp.csv"), &fit.svs_curve)?;
    out.csv(&format!("diabetes_{tag}_lars_order.csv"), &["step", "variable"], |w| {
        for (i, &j) in fit.lars_order.iter().enumerate() {
            w.write_record([(i + 1).to_string(), names[j].clone()])?;
        }
        Ok(())
    })?;
    out.csv(
        &format!("diabetes_{tag}_svs_ranking.csv"),
        &["rank", "variable", "post_mean", "inclusion_freq"],
        |w| {
            for (i, &j) in fit.ranking.iter().enumerate() {
                w.write_record([
                    (i + 1).to_string(),
                    names[j].clone(),
                    num(fit.post_mean[j]),
                    num(fit.inclusion[j]),
                ])?;
            }
            Ok(())
        },
    )?;

    let label = |sel: &Selection| {
        sel.active
            .iter()
            .map(|&j| names[j].as_str())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut text = String::new();
    let _ = writeln!(text, "model: {tag} ({} covariates, n = {})", names.len(), fit.n);
    let _ = writeln!(text, "sigma2_hat (full model): {:.6}", fit.sigma2);
    let _ = writeln!(
        text,
        "LARS min Cp: k = {}, Cp = {:.3}",
        fit.lars_selection.k, fit.lars_selection.cp
    );
    let _ = writeln!(text, "  selected: {}", label(&fit.lars_selection));
    let _ = writeln!(
        text,
        "SVS ranked min Cp: k = {}, Cp = {:.3}",
        fit.svs_selection.k, fit.svs_selection.cp
    );
    let _ = writeln!(text, "  selected: {}", label(&fit.svs_selection));
    let top: Vec<&str> = fit.ranking.iter().take(8).map(|&j| names[j].as_str()).collect();
    let _ = writeln!(text, "SVS top 8 by |posterior mean|: {}", top.join(", "));
    out.text(&format!("diabetes_{tag}_summary.txt"), &text)?;

    Ok(vec![RepSeed {
        rho: None,
        rep: 0,
        data_stream: 0,
        chain_seed: Some(spec.svs.seed),
    }])
}
