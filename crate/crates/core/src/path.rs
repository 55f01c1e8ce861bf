//! Model sequences produced by the selection procedures and their Cp curves.

use std::fmt;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::CpCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Lars,
    Stepwise,
    SvsRanked,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Lars => "lars",
            Method::Stepwise => "stepwise",
            Method::SvsRanked => "svs_ranked",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    /// Active variables in order of entry.
    pub active: Vec<usize>,
    /// Full-length coefficient vector supported on `active`.
    pub coeffs: Array1<f64>,
    pub mu_hat: Array1<f64>,
    pub rss: f64,
}

impl PathStep {
    pub fn k(&self) -> usize {
        self.active.len()
    }
}

/// Why a path stopped before its requested length.
#[derive(Debug, Clone, PartialEq)]
pub enum Truncation {
    /// Adding the next variable made the active Gram/QR factor singular.
    SingularGram { at_step: usize, candidate: usize },
    /// No remaining candidate reduces the residual sum of squares.
    NoImprovement { at_step: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathFit {
    pub method: Method,
    pub steps: Vec<PathStep>,
    pub truncation: Option<Truncation>,
    /// Tied entry competitions resolved by lowest index, as `(step, chosen)`.
    pub ties: Vec<(usize, usize)>,
}

impl PathFit {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &PathStep {
        self.steps.last().expect("paths always hold the empty model")
    }

    pub fn n(&self) -> usize {
        self.steps[0].mu_hat.len()
    }

    /// Cp curve charging `k` degrees of freedom at a step with `k` active
    /// variables.
    pub fn cp_curve(&self, sigma2: f64) -> Result<CpCurve> {
        if self.steps.is_empty() {
            return Err(Error::InvalidData("empty path".into()));
        }
        CpCurve::from_rss(self.steps.iter().map(|s| (s.k(), s.rss)), sigma2, self.n())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub k: usize,
    pub cp: f64,
    pub active: Vec<usize>,
    pub step: usize,
}

/// Smallest-k minimizer of the curve together with that step's active set.
pub fn select_min_cp(curve: &CpCurve, path: &PathFit) -> Result<Selection> {
    let idx = curve.min_index();
    let entry = curve.entries[idx];
    let step = path
        .steps
        .iter()
        .position(|s| s.k() == entry.k)
        .ok_or_else(|| Error::Invariant(format!("no path step with {} active variables", entry.k)))?;
    Ok(Selection {
        k: entry.k,
        cp: entry.cp,
        active: path.steps[step].active.clone(),
        step,
    })
}
