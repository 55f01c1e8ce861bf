//! CSV readers and writers for datasets, curves and posterior summaries.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::model::{CpCurve, Dataset};
use crate::svs::PosteriorSummary;

/// `k,rss,cp`, one row per curve entry.
pub fn write_cp_curve<W: Write>(w: W, curve: &CpCurve) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k", "rss", "cp"])?;
    for e in &curve.entries {
        out.write_record([e.k.to_string(), e.rss.to_string(), e.cp.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Parse a `k,rss,cp` file back into `(k, rss, cp)` triples.
pub fn read_cp_curve<R: Read>(r: R) -> Result<Vec<(usize, f64, f64)>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<&str> {
            rec.get(i)
                .ok_or_else(|| Error::InvalidData(format!("curve row missing field {i}")))
        };
        let parse_f =
            |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::InvalidData(format!("bad number {s:?}"))) };
        let k = field(0)?
            .parse()
            .map_err(|_| Error::InvalidData("bad dimension".into()))?;
        rows.push((k, parse_f(field(1)?)?, parse_f(field(2)?)?));
    }
    Ok(rows)
}

/// `index,name,post_mean,inclusion_freq` (1-based index).
pub fn write_posterior<W: Write>(w: W, s: &PosteriorSummary, names: &[String]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "name", "post_mean", "inclusion_freq"])?;
    for j in 0..s.post_mean_beta.len() {
        out.write_record([
            (j + 1).to_string(),
            names[j].clone(),
            s.post_mean_beta[j].to_string(),
            s.inclusion_freq[j].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Header `x1..xm,y` (or the dataset's names), response in the last column.
pub fn write_dataset<W: Write>(w: W, d: &Dataset) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = match &d.names {
        Some(n) => n.clone(),
        None => (1..=d.m()).map(|j| format!("x{j}")).collect(),
    };
    header.push("y".into());
    out.write_record(&header)?;
    let mut row = Vec::with_capacity(d.m() + 1);
    for i in 0..d.n() {
        row.clear();
        row.extend(d.x.row(i).iter().map(|v| v.to_string()));
        row.push(d.y[i].to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Ground-truth sidecar: `index,beta,nonzero` (1-based index).
pub fn write_truth<W: Write>(w: W, d: &Dataset) -> Result<()> {
    let beta = d
        .beta_true
        .as_ref()
        .ok_or_else(|| Error::InvalidData("dataset has no ground truth".into()))?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "beta", "nonzero"])?;
    for (j, b) in beta.iter().enumerate() {
        out.write_record([(j + 1).to_string(), b.to_string(), ((*b != 0.0) as u8).to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// A named table: header plus numeric rows.
#[derive(Debug, Clone)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Read a comma-separated numeric table with a header row.
pub fn read_numeric_table<R: Read>(r: R) -> Result<NumericTable> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(|h| h.to_string()).collect();
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::InvalidData(format!(
                "row {} has {} fields, expected {}",
                i + 2,
                rec.len(),
                header.len()
            )));
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, v)| {
                v.parse::<f64>()
                    .map_err(|_| Error::InvalidData(format!("column {:?} row {}: bad number {v:?}", header[j], i + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(NumericTable { header, rows })
}

/// Split a numeric table into a dataset using the named columns.
pub fn dataset_from_table(t: &NumericTable, covariates: &[usize], response: usize) -> Result<Dataset> {
    let n = t.rows.len();
    let m = covariates.len();
    let mut x = Array2::zeros((n, m));
    let mut y = Array1::zeros(n);
    for (i, row) in t.rows.iter().enumerate() {
        for (jj, &j) in covariates.iter().enumerate() {
            x[[i, jj]] = row[j];
        }
        y[i] = row[response];
    }
    let names = covariates.iter().map(|&j| t.header[j].clone()).collect();
    Dataset::new(x, y)?.with_names(names)
}
