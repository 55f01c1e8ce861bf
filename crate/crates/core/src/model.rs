//! Datasets, standardization, subset least squares and the Cp statistic.

use ndarray::{Array1, Array2, ShapeBuilder};

use crate::error::{Error, Result};
use crate::linalg::{self, householder_lstsq};

/// Raw regression data: `x` is n×m with observations in rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub mu_true: Option<Array1<f64>>,
    pub beta_true: Option<Array1<f64>>,
    pub names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let (n, m) = x.dim();
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 observations, got {n}")));
        }
        if m < 1 {
            return Err(Error::InvalidData("need at least one covariate".into()));
        }
        if y.len() != n {
            return Err(Error::InvalidData(format!(
                "response has length {} but design has {n} rows",
                y.len()
            )));
        }
        if let Some(((i, j), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite design entry at ({i}, {j})")));
        }
        if let Some((i, _)) = y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite response at row {i}")));
        }
        Ok(Self {
            x,
            y,
            mu_true: None,
            beta_true: None,
            names: None,
        })
    }

    /// Attach simulation ground truth. `mu_true` must equal `x · beta_true`.
    pub fn with_truth(mut self, mu_true: Array1<f64>, beta_true: Array1<f64>) -> Result<Self> {
        if mu_true.len() != self.n() || beta_true.len() != self.m() {
            return Err(Error::InvalidData("ground truth has the wrong shape".into()));
        }
        let implied = self.x.dot(&beta_true);
        let scale = implied.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let diff = (&implied - &mu_true).iter().map(|v| v * v).sum::<f64>().sqrt();
        if diff > 1e-10 * scale {
            return Err(Error::InvalidData(format!(
                "mu_true differs from X·beta_true by {diff:.3e}"
            )));
        }
        self.mu_true = Some(mu_true);
        self.beta_true = Some(beta_true);
        Ok(self)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.m() {
            return Err(Error::InvalidData(format!(
                "{} names for {} covariates",
                names.len(),
                self.m()
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.x.ncols()
    }

    /// Indices of nonzero true coefficients, if ground truth is attached.
    pub fn true_support(&self) -> Option<Vec<usize>> {
        self.beta_true.as_ref().map(|b| {
            b.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, _)| j)
                .collect()
        })
    }
}

/// Centered, unit-norm design and centered response.
///
/// `xs` is stored column-major so each column is a contiguous slice.
#[derive(Debug, Clone)]
pub struct StandardizedDataset {
    pub xs: Array2<f64>,
    pub ys: Array1<f64>,
    pub column_means: Array1<f64>,
    pub column_scales: Array1<f64>,
    pub y_mean: f64,
    /// True mean on the centered scale, when known.
    pub mu_centered: Option<Array1<f64>>,
    pub names: Option<Vec<String>>,
}

impl StandardizedDataset {
    pub fn n(&self) -> usize {
        self.xs.nrows()
    }

    pub fn m(&self) -> usize {
        self.xs.ncols()
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        self.xs
            .column(j)
            .to_slice()
            .expect("standardized design is column-major")
    }

    pub fn response(&self) -> &[f64] {
        self.ys.as_slice().expect("contiguous response")
    }

    pub fn columns(&self) -> Vec<&[f64]> {
        (0..self.m()).map(|j| self.column(j)).collect()
    }

    pub fn name(&self, j: usize) -> String {
        self.names
            .as_ref()
            .map(|n| n[j].clone())
            .unwrap_or_else(|| format!("x{}", j + 1))
    }

    /// Map standardized-scale coefficients back to the raw covariate scale.
    pub fn raw_coefficients(&self, coeffs: &Array1<f64>) -> Array1<f64> {
        coeffs / &self.column_scales
    }

    /// `Xs · beta` on the centered scale.
    pub fn predict(&self, coeffs: &[f64]) -> Array1<f64> {
        let mut out = vec![0.0; self.n()];
        for (j, &b) in coeffs.iter().enumerate() {
            if b != 0.0 {
                linalg::axpy(b, self.column(j), &mut out);
            }
        }
        Array1::from(out)
    }
}

/// Build a column-major matrix from column vectors.
pub fn column_major(n: usize, columns: &[Vec<f64>]) -> Array2<f64> {
    let m = columns.len();
    let mut data = Vec::with_capacity(n * m);
    for c in columns {
        assert_eq!(c.len(), n);
        data.extend_from_slice(c);
    }
    Array2::from_shape_vec((n, m).f(), data).expect("shape matches")
}

/// Center every column, scale it to unit Euclidean norm and center `y`.
pub fn standardize(d: &Dataset) -> Result<StandardizedDataset> {
    let (n, m) = d.x.dim();
    let mut cols = Vec::with_capacity(m);
    let mut means = Vec::with_capacity(m);
    let mut scales = Vec::with_capacity(m);
    for j in 0..m {
        let col = d.x.column(j);
        let mean = col.sum() / n as f64;
        let raw_norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let centered: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let norm = linalg::norm_sq(&centered).sqrt();
        if norm <= 1e-12 * raw_norm || norm == 0.0 {
            return Err(Error::ConstantColumn { index: j });
        }
        cols.push(centered.into_iter().map(|v| v / norm).collect::<Vec<_>>());
        means.push(mean);
        scales.push(norm);
    }
    let y_mean = d.y.sum() / n as f64;
    let ys = d.y.mapv(|v| v - y_mean);
    let mu_centered = d.mu_true.as_ref().map(|mu| {
        let mm = mu.sum() / n as f64;
        mu.mapv(|v| v - mm)
    });
    Ok(StandardizedDataset {
        xs: column_major(n, &cols),
        ys,
        column_means: Array1::from(means),
        column_scales: Array1::from(scales),
        y_mean,
        mu_centered,
        names: d.names.clone(),
    })
}

/// Least-squares fit on a subset of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetFit {
    pub subset: Vec<usize>,
    pub beta: Vec<f64>,
    pub mu_hat: Array1<f64>,
    pub rss: f64,
}

/// Project `y` onto the span of the given columns (Householder QR).
pub fn ols_columns(columns: &[&[f64]], y: &[f64], subset: &[usize]) -> Result<SubsetFit> {
    let n = y.len();
    if subset.len() > n.saturating_sub(1) && !subset.is_empty() {
        return Err(Error::RankDeficient {
            subset: subset.to_vec(),
            condition: f64::INFINITY,
        });
    }
    let selected: Vec<&[f64]> = subset.iter().map(|&j| columns[j]).collect();
    let beta = householder_lstsq(&selected, y, subset)?;
    let mut mu = vec![0.0; n];
    for (c, b) in selected.iter().zip(&beta) {
        linalg::axpy(*b, c, &mut mu);
    }
    let rss = y.iter().zip(&mu).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(SubsetFit {
        subset: subset.to_vec(),
        beta,
        mu_hat: Array1::from(mu),
        rss,
    })
}

pub fn ols_subset(d: &StandardizedDataset, subset: &[usize]) -> Result<SubsetFit> {
    let m = d.m();
    let mut seen = vec![false; m];
    for &j in subset {
        if j >= m {
            return Err(Error::IndexOutOfRange { index: j, len: m });
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidData(format!("duplicate index {j} in subset")));
        }
    }
    ols_columns(&d.columns(), d.response(), subset)
}

/// Full-model residual variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseVariance {
    Estimate(f64),
    /// The response lies in the column span; Cp is undefined.
    Degenerate,
}

impl NoiseVariance {
    pub fn value(self) -> Result<f64> {
        match self {
            NoiseVariance::Estimate(v) => Ok(v),
            NoiseVariance::Degenerate => Err(Error::NonPositiveSigma2(0.0)),
        }
    }
}

/// `RSS_full / (n - m)` from OLS on every covariate.
pub fn estimate_sigma2_full(d: &StandardizedDataset) -> Result<NoiseVariance> {
    let (n, m) = (d.n(), d.m());
    if n <= m {
        return Err(Error::Sigma2Unavailable(format!("n = {n} is not larger than m = {m}")));
    }
    let all: Vec<usize> = (0..m).collect();
    let fit = ols_subset(d, &all)?;
    let s2 = fit.rss / (n - m) as f64;
    let scale = linalg::norm_sq(d.response()) / n as f64;
    if s2 <= 1e-28 * scale.max(f64::MIN_POSITIVE) {
        log::warn!("full model interpolates the response; noise variance is degenerate");
        return Ok(NoiseVariance::Degenerate);
    }
    Ok(NoiseVariance::Estimate(s2))
}

/// Mallows' statistic `rss / sigma2 - n + 2k`.
pub fn cp_value(rss: f64, sigma2: f64, n: usize, k: usize) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::NonPositiveSigma2(sigma2));
    }
    if k > n {
        return Err(Error::OutOfRange(format!("dimension {k} exceeds n = {n}")));
    }
    Ok(rss / sigma2 - n as f64 + 2.0 * k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpEntry {
    pub k: usize,
    pub rss: f64,
    pub cp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpCurve {
    pub sigma2_hat: f64,
    pub n: usize,
    pub entries: Vec<CpEntry>,
    /// Smallest dimension attaining the minimal Cp.
    pub k_min: usize,
}

impl CpCurve {
    /// Build a curve from `(k, rss)` pairs; `k` must be strictly increasing.
    pub fn from_rss<I>(points: I, sigma2: f64, n: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut entries: Vec<CpEntry> = Vec::new();
        for (k, rss) in points {
            if let Some(last) = entries.last() {
                if k <= last.k {
                    return Err(Error::Invariant(format!(
                        "Cp curve dimensions must increase ({} then {k})",
                        last.k
                    )));
                }
            }
            entries.push(CpEntry {
                k,
                rss,
                cp: cp_value(rss, sigma2, n, k)?,
            });
        }
        if entries.is_empty() {
            return Err(Error::InvalidData("empty Cp curve".into()));
        }
        let k_min = entries[Self::argmin_index(&entries)].k;
        Ok(Self {
            sigma2_hat: sigma2,
            n,
            entries,
            k_min,
        })
    }

    fn argmin_index(entries: &[CpEntry]) -> usize {
        let mut best = 0;
        for (i, e) in entries.iter().enumerate() {
            if e.cp < entries[best].cp {
                best = i;
            }
        }
        best
    }

    pub fn min_index(&self) -> usize {
        Self::argmin_index(&self.entries)
    }

    pub fn min_cp(&self) -> f64 {
        self.entries[self.min_index()].cp
    }

    pub fn get(&self, k: usize) -> Option<&CpEntry> {
        self.entries
            .binary_search_by_key(&k, |e| e.k)
            .ok()
            .map(|i| &self.entries[i])
    }
}
