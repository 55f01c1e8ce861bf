//! Simulated regression problems.
//!
//! Two families: correlated Gaussian designs with clustered coefficients
//! calibrated to a target theoretical R², and random orthogonal designs whose
//! columns are distinct standard basis vectors.
//!
//! # Random streams
//!
//! Every random quantity comes from a ChaCha20 generator seeded with the
//! run's 64-bit seed and positioned on a dedicated stream (ChaCha's 64-bit
//! stream selector). Streams are disjoint keystreams, so replications never
//! share draws. The stream id packs the replication index with a purpose tag
//! (see [`Stream`]).

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Purpose of a random stream within one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Design matrix and noise for a simulated dataset.
    Data(u64),
    /// Seed material for the spike-and-slab sampler.
    Svs(u64),
    /// Random orthogonal instance.
    Orthogonal(u64),
    /// Anything else a caller wants to keep apart, tagged by the caller.
    Custom(u64, u8),
}

impl Stream {
    pub fn id(self) -> u64 {
        let (rep, tag) = match self {
            Stream::Data(r) => (r, 1u8),
            Stream::Svs(r) => (r, 2),
            Stream::Orthogonal(r) => (r, 3),
            Stream::Custom(r, t) => (r, 16u8.saturating_add(t)),
        };
        (rep << 8) | tag as u64
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClusterShape {
    /// `(h - |j|)^exponent`, peaking at the cluster center.
    #[default]
    Symmetric,
    /// `|h - j|^exponent` taken literally for `|j| < h`.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimScenario {
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub spacing: usize,
    pub h: usize,
    pub exponent: f64,
    pub r2: f64,
    pub sigma2: f64,
    pub seed: u64,
    pub reps: usize,
    pub shape: ClusterShape,
}

impl Default for SimScenario {
    fn default() -> Self {
        Self {
            n: 800,
            m: 400,
            rho: 0.0,
            spacing: 25,
            h: 4,
            exponent: 1.25,
            r2: 0.75,
            sigma2: 1.0,
            seed: 20040401,
            reps: 100,
            shape: ClusterShape::Symmetric,
        }
    }
}

impl SimScenario {
    pub fn with_rho(&self, rho: f64) -> Self {
        Self { rho, ..self.clone() }
    }

    /// 1-based cluster centers.
    pub fn cluster_centers(&self) -> Vec<usize> {
        let reach = self.h.saturating_sub(1);
        (1..)
            .map(|t| t * self.spacing)
            .take_while(|c| c + reach <= self.m)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n < 2 || self.m < 1 {
            return bad(format!("need n >= 2 and m >= 1 (n = {}, m = {})", self.n, self.m));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1), got {}", self.rho));
        }
        if self.h == 0 {
            return bad("cluster half-width must be at least 1".into());
        }
        if self.spacing <= 2 * (self.h - 1) {
            return bad(format!(
                "clusters overlap: spacing {} must exceed 2(h - 1) = {}",
                self.spacing,
                2 * (self.h - 1)
            ));
        }
        if self.cluster_centers().is_empty() {
            return bad(format!("no cluster of half-width {} fits in m = {}", self.h, self.m));
        }
        if !(self.r2 > 0.0 && self.r2 < 1.0) {
            return bad(format!("target R² must lie in (0, 1), got {}", self.r2));
        }
        if !(self.sigma2 >= 0.0) || !self.sigma2.is_finite() {
            return bad(format!("noise variance must be nonnegative, got {}", self.sigma2));
        }
        if !self.exponent.is_finite() {
            return bad("exponent must be finite".into());
        }
        Ok(())
    }

    pub fn nonzero_count(&self) -> usize {
        self.cluster_centers().len() * (2 * self.h - 1)
    }

    pub fn ground_truth(&self) -> Result<GroundTruth> {
        let base = build_cluster_beta(self)?;
        if self.sigma2 == 0.0 {
            // no noise: R² is 1 whatever the scale, keep the base magnitudes
            return ground_truth_scaled(base, self.rho, 1.0);
        }
        calibrate_beta(&base, self.rho, self.r2, self.sigma2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub beta: Array1<f64>,
    pub nonzero_set: Vec<usize>,
    pub calibration_constant: f64,
    /// βᵀΣβ after calibration.
    pub theoretical_signal: f64,
}

impl GroundTruth {
    pub fn theoretical_r2(&self, sigma2: f64) -> f64 {
        self.theoretical_signal / (self.theoretical_signal + sigma2)
    }
}

/// Rows are i.i.d. zero-mean Gaussian with `Cov(x_j, x_k) = rho^|j-k|`,
/// realized through the AR(1) recursion along each row.
pub fn gen_ar1_covariates<R: Rng + ?Sized>(n: usize, m: usize, rho: f64, rng: &mut R) -> Result<Array2<f64>> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidScenario(format!("rho must lie in [0, 1), got {rho}")));
    }
    let innov = (1.0 - rho * rho).sqrt();
    let mut data = Vec::with_capacity(n * m);
    for _ in 0..n {
        let mut prev = 0.0;
        for j in 0..m {
            let z: f64 = rng.sample(StandardNormal);
            let x = if j == 0 { z } else { rho * prev + innov * z };
            data.push(x);
            prev = x;
        }
    }
    Ok(Array2::from_shape_vec((n, m), data).expect("n*m entries"))
}

/// Clustered coefficients before calibration (0-based storage of 1-based
/// cluster centers).
pub fn build_cluster_beta(s: &SimScenario) -> Result<Array1<f64>> {
    s.validate()?;
    let mut beta = Array1::zeros(s.m);
    let h = s.h as i64;
    for c in s.cluster_centers() {
        for j in -(h - 1)..=(h - 1) {
            let base = match s.shape {
                ClusterShape::Symmetric => (h - j.abs()) as f64,
                ClusterShape::Literal => (h - j).abs() as f64,
            };
            let idx = (c as i64 + j - 1) as usize;
            beta[idx] = base.powf(s.exponent);
        }
    }
    Ok(beta)
}

/// `βᵀΣβ` for `Σ_jk = rho^|j-k|`, summing only lags whose weight exceeds
/// 1e-16.
pub fn ar1_quadratic_form(beta: &Array1<f64>, rho: f64) -> f64 {
    let m = beta.len();
    let mut total: f64 = beta.iter().map(|b| b * b).sum();
    if rho == 0.0 {
        return total;
    }
    let mut w = rho;
    let mut lag = 1;
    while lag < m && w.abs() > 1e-16 {
        let s: f64 = (0..m - lag).map(|j| beta[j] * beta[j + lag]).sum();
        total += 2.0 * w * s;
        lag += 1;
        w *= rho;
    }
    total
}

fn ground_truth_scaled(base: Array1<f64>, rho: f64, c: f64) -> Result<GroundTruth> {
    let beta = base * c;
    let nonzero_set = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect();
    let theoretical_signal = ar1_quadratic_form(&beta, rho);
    Ok(GroundTruth {
        beta,
        nonzero_set,
        calibration_constant: c,
        theoretical_signal,
    })
}

/// Scale `beta_base` so that `βᵀΣβ / (βᵀΣβ + σ²)` equals `target_r2`.
pub fn calibrate_beta(beta_base: &Array1<f64>, rho: f64, target_r2: f64, sigma2: f64) -> Result<GroundTruth> {
    if !(target_r2 > 0.0 && target_r2 < 1.0) {
        return Err(Error::InvalidScenario(format!(
            "target R² must lie in (0, 1), got {target_r2}"
        )));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidScenario(format!(
            "calibration needs sigma2 > 0, got {sigma2}"
        )));
    }
    let q = ar1_quadratic_form(beta_base, rho);
    if !(q > 0.0) {
        return Err(Error::InvalidScenario("coefficient quadratic form is zero".into()));
    }
    let c = ((target_r2 / (1.0 - target_r2)) * sigma2 / q).sqrt();
    ground_truth_scaled(beta_base.clone(), rho, c)
}

/// One replication of the scenario. Deterministic in `(scenario.seed, rep)`.
pub fn simulate_dataset(s: &SimScenario, rep: u64) -> Result<Dataset> {
    let truth = s.ground_truth()?;
    simulate_with_truth(s, &truth, rep)
}

pub fn simulate_with_truth(s: &SimScenario, truth: &GroundTruth, rep: u64) -> Result<Dataset> {
    let mut rng = stream_rng(s.seed, Stream::Data(rep));
    let x = gen_ar1_covariates(s.n, s.m, s.rho, &mut rng)?;
    let mu = x.dot(&truth.beta);
    let sd = s.sigma2.sqrt();
    let y = if s.sigma2 == 0.0 {
        mu.clone()
    } else {
        mu.mapv(|v| v + sd * rng.sample::<f64, _>(StandardNormal))
    };
    Dataset::new(x, y)?.with_truth(mu, truth.beta.clone())
}

/// A random orthogonal design together with the rows its columns occupy.
#[derive(Debug, Clone)]
pub struct OrthogonalDesign {
    pub dataset: Dataset,
    /// `rows[j]` is the basis index of column j.
    pub rows: Vec<usize>,
}

impl OrthogonalDesign {
    /// Responses at the design coordinates, in column order.
    pub fn design_responses(&self) -> Vec<f64> {
        self.rows.iter().map(|&i| self.dataset.y[i]).collect()
    }

    /// Sum of squared responses off the design coordinates.
    pub fn off_design_ss(&self) -> f64 {
        let mut on = vec![false; self.dataset.n()];
        for &i in &self.rows {
            on[i] = true;
        }
        self.dataset
            .y
            .iter()
            .zip(&on)
            .filter(|(_, o)| !**o)
            .map(|(v, _)| v * v)
            .sum()
    }
}

/// Columns are `m` distinct standard basis vectors of Rⁿ drawn without
/// replacement; the first `k0` columns carry `magnitudes` with random signs;
/// noise is N(0, 1).
pub fn gen_random_orthogonal<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    k0: usize,
    magnitudes: &[f64],
    rng: &mut R,
) -> Result<OrthogonalDesign> {
    if m > n {
        return Err(Error::InvalidScenario(format!("m = {m} exceeds n = {n}")));
    }
    if m == 0 || n < 2 {
        return Err(Error::InvalidScenario("need m >= 1 and n >= 2".into()));
    }
    if k0 > m {
        return Err(Error::InvalidScenario(format!("k0 = {k0} exceeds m = {m}")));
    }
    if magnitudes.len() != k0 {
        return Err(Error::InvalidScenario(format!(
            "{} magnitudes supplied for k0 = {k0}",
            magnitudes.len()
        )));
    }
    let rows = rand::seq::index::sample(rng, n, m).into_vec();
    let mut x = Array2::zeros((n, m));
    let mut beta = Array1::zeros(m);
    for (j, &i) in rows.iter().enumerate() {
        x[[i, j]] = 1.0;
    }
    for (j, &mag) in magnitudes.iter().enumerate() {
        beta[j] = if rng.random::<bool>() { mag } else { -mag };
    }
    let mu = x.dot(&beta);
    let y = mu.mapv(|v| v + rng.sample::<f64, _>(StandardNormal));
    let dataset = Dataset::new(x, y)?.with_truth(mu, beta)?;
    Ok(OrthogonalDesign { dataset, rows })
}
