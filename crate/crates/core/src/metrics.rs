//! Selection accuracy and prediction metrics, and their aggregation over
//! replications.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::Array1;

use crate::error::{Error, Result};

/// Methods reported in the benchmark table, in display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BenchMethod {
    Lars,
    SvsCp,
    SvsBma,
    Step,
}

impl BenchMethod {
    pub const ALL: [BenchMethod; 4] = [
        BenchMethod::Lars,
        BenchMethod::SvsCp,
        BenchMethod::SvsBma,
        BenchMethod::Step,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BenchMethod::Lars => "LARS",
            BenchMethod::SvsCp => "svsCp",
            BenchMethod::SvsBma => "svsBMA",
            BenchMethod::Step => "Step",
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total_miss(&self) -> usize {
        self.fp + self.fn_
    }

    /// False discoveries among covariates declared nonzero (0 when none are).
    pub fn fdr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tp)
    }

    /// False non-discoveries among covariates declared zero (0 when none are).
    pub fn fnr(&self) -> f64 {
        ratio(self.fn_, self.fn_ + self.tn)
    }

    pub fn selected(&self) -> usize {
        self.tp + self.fp
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn confusion_counts(selected: &[usize], true_nonzero: &[usize], m: usize) -> Result<ConfusionCounts> {
    let mut sel = vec![false; m];
    let mut truth = vec![false; m];
    for (set, flags) in [(selected, &mut sel), (true_nonzero, &mut truth)] {
        for &j in set {
            if j >= m {
                return Err(Error::IndexOutOfRange { index: j, len: m });
            }
            flags[j] = true;
        }
    }
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (s, t) in sel.iter().zip(&truth) {
        match (s, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn fdr(c: &ConfusionCounts) -> f64 {
    c.fdr()
}

pub fn fnr(c: &ConfusionCounts) -> f64 {
    c.fnr()
}

pub fn total_miss(c: &ConfusionCounts) -> usize {
    c.total_miss()
}

/// `1 - ‖μ̂ - μ‖² / ‖μ‖²` after centering both vectors.
pub fn proportion_explained(mu_hat: &Array1<f64>, mu_true: &Array1<f64>) -> Result<f64> {
    if mu_hat.len() != mu_true.len() {
        return Err(Error::InvalidData("fitted and true means differ in length".into()));
    }
    let n = mu_true.len() as f64;
    let (mh, mt) = (mu_hat.sum() / n, mu_true.sum() / n);
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in mu_hat.iter().zip(mu_true) {
        let (a, b) = (a - mh, b - mt);
        num += (a - b) * (a - b);
        den += b * b;
    }
    if den == 0.0 {
        return Err(Error::InvalidData("true mean vector is constant".into()));
    }
    Ok(1.0 - num / den)
}

/// Metrics of one method on one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepMetrics {
    pub method: BenchMethod,
    pub m_hat: usize,
    pub pe: f64,
    pub counts: ConfusionCounts,
}

impl RepMetrics {
    pub fn new(
        method: BenchMethod,
        selected: &[usize],
        true_nonzero: &[usize],
        m: usize,
        mu_hat: &Array1<f64>,
        mu_true: &Array1<f64>,
    ) -> Result<Self> {
        let counts = confusion_counts(selected, true_nonzero, m)?;
        Ok(Self {
            method,
            m_hat: counts.selected(),
            pe: proportion_explained(mu_hat, mu_true)?,
            counts,
        })
    }
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Self {
        let k = values.len();
        if k == 0 {
            return Self::default();
        }
        // pairwise-free but order independent: sort first
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let mean = v.iter().sum::<f64>() / k as f64;
        let se = if k > 1 {
            let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, se }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: BenchMethod,
    pub m_hat: MeanSe,
    pub pe: MeanSe,
    pub total_miss: MeanSe,
    pub fdr: MeanSe,
    pub fnr: MeanSe,
    pub reps: usize,
}

/// Per-method means and standard errors, rows in table order. Methods with no
/// records are left out.
pub fn aggregate_replications(records: &[RepMetrics]) -> Vec<MetricsRow> {
    let mut by_method: BTreeMap<BenchMethod, Vec<&RepMetrics>> = BTreeMap::new();
    for r in records {
        by_method.entry(r.method).or_default().push(r);
    }
    let mut rows = Vec::new();
    for method in BenchMethod::ALL {
        let Some(rs) = by_method.get(&method) else {
            log::warn!("no replications recorded for {method}");
            continue;
        };
        let col = |f: &dyn Fn(&RepMetrics) -> f64| MeanSe::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
        rows.push(MetricsRow {
            method,
            m_hat: col(&|r| r.m_hat as f64),
            pe: col(&|r| r.pe),
            total_miss: col(&|r| r.counts.total_miss() as f64),
            fdr: col(&|r| r.counts.fdr()),
            fnr: col(&|r| r.counts.fnr()),
            reps: rs.len(),
        });
    }
    rows
}
