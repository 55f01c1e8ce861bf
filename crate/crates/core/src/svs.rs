//! Spike-and-slab stochastic variable selection.
//!
//! Hierarchy (George–McCulloch two-point mixture):
//!
//! ```text
//! y | β, σ²        ~ N(Xβ, σ² I)
//! β_j | γ_j, σ²    ~ N(0, γ_j σ²),   γ_j ∈ {v0, v1}
//! γ_j = v1 | w     ~ Bernoulli(w)
//! w                ~ Beta(a, b)
//! σ²               ~ InvGamma(shape, scale)
//! ```
//!
//! The sampler runs on covariates scaled to unit variance (squared column
//! norm n), which makes `v0`/`v1` dimensionless: a slab standard deviation
//! of `σ√v1` is `√(n v1)` least-squares standard errors wide. The default
//! `v1 = 0.02` puts the slab on the scale of a covariate explaining a few
//! percent of the noise variance. Reported coefficients are mapped back to
//! the unit-norm standardized scale.
//!
//! `β` is drawn jointly from its Gaussian full conditional by perturbing the
//! normal equations: with `A = XᵀX + D⁻¹`,
//! `β = A⁻¹(Xᵀ(y + σε₁) + σ D^{-1/2} ε₂)` has mean `A⁻¹Xᵀy` and covariance
//! `σ²A⁻¹`. `ε₁` is indexed by observation and `ε₂` by covariate, and each
//! covariate owns its random stream, so reordering covariates reorders the
//! chain without changing it.

use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, PackedCholesky};
use crate::model::{CpCurve, StandardizedDataset};
use crate::path::{Method, PathFit, PathStep, Truncation};
use crate::sim::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvsConfig {
    /// Spike variance multiplier.
    #[serde(rename = "v0")]
    pub spike_variance: f64,
    /// Slab variance multiplier.
    #[serde(rename = "v1")]
    pub slab_variance: f64,
    /// Beta(a, b) prior on the slab weight.
    #[serde(rename = "a")]
    pub inclusion_a: f64,
    #[serde(rename = "b")]
    pub inclusion_b: f64,
    /// Inverse-gamma prior on σ².
    #[serde(rename = "shape")]
    pub noise_shape: f64,
    #[serde(rename = "scale")]
    pub noise_scale: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for SvsConfig {
    fn default() -> Self {
        Self {
            spike_variance: 1e-4,
            slab_variance: 0.02,
            inclusion_a: 1.0,
            inclusion_b: 1.0,
            noise_shape: 2.01,
            noise_scale: 1.01,
            iterations: 5000,
            burn_in: 1000,
            seed: 1,
        }
    }
}

impl SvsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.spike_variance > 0.0) {
            return bad("v0 must be positive");
        }
        if !(self.slab_variance > self.spike_variance) || !self.slab_variance.is_finite() {
            return bad("v1 must be finite and exceed v0");
        }
        if !(self.inclusion_a > 0.0 && self.inclusion_b > 0.0) {
            return bad("Beta prior parameters must be positive");
        }
        if !(self.noise_shape > 0.0 && self.noise_scale > 0.0) {
            return bad("inverse-gamma parameters must be positive");
        }
        if self.iterations <= self.burn_in {
            return bad("iterations must exceed burn_in");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    /// Posterior mean on the unit-norm standardized scale.
    pub post_mean_beta: Array1<f64>,
    pub inclusion_freq: Array1<f64>,
    pub sampled_sigma2_mean: f64,
    pub weight_mean: f64,
    pub kept_sweeps: usize,
}

/// State handed to an observer after every sweep (burn-in included).
#[derive(Debug)]
pub struct SweepState<'a> {
    pub sweep: usize,
    pub kept: bool,
    /// Sampled coefficients on the unit-norm standardized scale.
    pub beta: &'a [f64],
    pub slab: &'a [bool],
    pub sigma2: f64,
    pub weight: f64,
}

/// Full conditional of β: `N(A⁻¹Xᵀy, σ²A⁻¹)` with `A = XᵀX + diag(1/prior_var)`.
#[derive(Debug, Clone)]
pub struct BetaConditional {
    factor: PackedCholesky,
    mean: Vec<f64>,
    sigma2: f64,
}

impl BetaConditional {
    /// `gram` is the dense row-major m×m matrix `XᵀX`.
    pub fn new(gram: &[f64], xty: &[f64], prior_var: &[f64], sigma2: f64) -> Result<Self> {
        let m = xty.len();
        let mut a = gram.to_vec();
        for j in 0..m {
            a[j * m + j] += 1.0 / prior_var[j];
        }
        let factor = PackedCholesky::factor(&a, m)?;
        let mut mean = xty.to_vec();
        factor.solve(&mut mean);
        Ok(Self { factor, mean, sigma2 })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Dense `σ²A⁻¹` (row-major).
    pub fn covariance(&self) -> Vec<f64> {
        let m = self.mean.len();
        let mut out = vec![0.0; m * m];
        for j in 0..m {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            self.factor.solve(&mut e);
            for i in 0..m {
                out[i * m + j] = self.sigma2 * e[i];
            }
        }
        out
    }

    /// Solve `A β = rhs` with the cached factor.
    pub fn solve(&self, rhs: &mut [f64]) {
        self.factor.solve(rhs);
    }
}

/// `P(γ_j = v1 | β_j, σ², w)`.
pub fn inclusion_probability(beta_j: f64, sigma2: f64, w: f64, v0: f64, v1: f64) -> f64 {
    let b2 = beta_j * beta_j / sigma2;
    let log_slab = w.ln() - 0.5 * v1.ln() - 0.5 * b2 / v1;
    let log_spike = (1.0 - w).ln() - 0.5 * v0.ln() - 0.5 * b2 / v0;
    let d = log_spike - log_slab;
    if d > 0.0 {
        let e = (-d).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + d.exp())
    }
}

/// Beta parameters of `w | γ`.
pub fn weight_conditional(n_slab: usize, m: usize, a: f64, b: f64) -> (f64, f64) {
    (a + n_slab as f64, b + (m - n_slab) as f64)
}

/// Inverse-gamma parameters of `σ² | β, γ, y`; `penalty = Σ β_j²/γ_j`.
pub fn sigma2_conditional(rss: f64, penalty: f64, n: usize, m: usize, shape: f64, scale: f64) -> (f64, f64) {
    (shape + 0.5 * (n + m) as f64, scale + 0.5 * (rss + penalty))
}

pub fn svs_gibbs(d: &StandardizedDataset, cfg: &SvsConfig) -> Result<PosteriorSummary> {
    let keys: Vec<u64> = (0..d.m() as u64).collect();
    svs_gibbs_observed(d, cfg, &keys, |_| {})
}

/// Gibbs sampler with explicit per-covariate stream keys and a sweep observer.
pub fn svs_gibbs_observed<F>(
    d: &StandardizedDataset,
    cfg: &SvsConfig,
    coordinate_keys: &[u64],
    mut observe: F,
) -> Result<PosteriorSummary>
where
    F: FnMut(&SweepState<'_>),
{
    cfg.validate()?;
    let (n, m) = (d.n(), d.m());
    if coordinate_keys.len() != m {
        return Err(Error::InvalidConfig(format!(
            "{} stream keys for {m} covariates",
            coordinate_keys.len()
        )));
    }
    let scale = (n as f64).sqrt();
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|j| d.column(j).iter().map(|v| v * scale).collect())
        .collect();
    let y = d.response();
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let g = linalg::dot(&cols[i], &cols[j]);
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
    }
    let xty: Vec<f64> = cols.iter().map(|c| linalg::dot(c, y)).collect();

    // stream 0: scalar updates, 1: observation noise, coordinate streams are
    // offset past both
    let mut rng_global = stream_rng(cfg.seed, Stream::Custom(0, 0));
    let mut rng_obs = stream_rng(cfg.seed, Stream::Custom(0, 1));
    let mut rng_coord: Vec<ChaCha20Rng> = coordinate_keys
        .iter()
        .map(|&k| stream_rng(cfg.seed, Stream::Custom(k + 1, 2)))
        .collect();

    let (v0, v1) = (cfg.spike_variance, cfg.slab_variance);
    let mut slab = vec![true; m];
    let mut w = 0.5;
    let mut sigma2 = (linalg::norm_sq(y) / n as f64).max(f64::MIN_POSITIVE);
    let mut beta = vec![0.0; m];
    let mut beta_out = vec![0.0; m];

    let mut sum_beta = vec![0.0; m];
    let mut sum_slab = vec![0usize; m];
    let mut sum_sigma2 = 0.0;
    let mut sum_w = 0.0;
    let mut kept = 0usize;

    let mut eps_obs = vec![0.0; n];
    for sweep in 0..cfg.iterations {
        // β | γ, σ², y
        let prior_var: Vec<f64> = slab.iter().map(|&s| if s { v1 } else { v0 }).collect();
        let cond = BetaConditional::new(&gram, &xty, &prior_var, 1.0)?;
        let sd = sigma2.sqrt();
        for e in eps_obs.iter_mut() {
            *e = rng_obs.sample(StandardNormal);
        }
        let pert: Vec<f64> = y.iter().zip(&eps_obs).map(|(yi, e)| yi + sd * e).collect();
        for j in 0..m {
            let e2: f64 = rng_coord[j].sample(StandardNormal);
            beta[j] = linalg::dot(&cols[j], &pert) + sd * e2 / prior_var[j].sqrt();
        }
        cond.solve(&mut beta);
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Invariant("non-finite coefficient draw".into()));
        }

        // γ | β, σ², w
        let mut n_slab = 0;
        for j in 0..m {
            let p = inclusion_probability(beta[j], sigma2, w, v0, v1);
            let u: f64 = rng_coord[j].random();
            slab[j] = u < p;
            n_slab += slab[j] as usize;
        }

        // w | γ
        let (wa, wb) = weight_conditional(n_slab, m, cfg.inclusion_a, cfg.inclusion_b);
        w = Beta::new(wa, wb)
            .map_err(|e| Error::Invariant(format!("beta draw: {e}")))?
            .sample(&mut rng_global)
            .clamp(1e-300, 1.0 - 1e-16);

        // σ² | β, γ, y
        let mut resid = y.to_vec();
        for j in 0..m {
            linalg::axpy(-beta[j], &cols[j], &mut resid);
        }
        let rss = linalg::norm_sq(&resid);
        let penalty: f64 = beta
            .iter()
            .zip(&slab)
            .map(|(b, &s)| b * b / if s { v1 } else { v0 })
            .sum();
        let (shape, rate) = sigma2_conditional(rss, penalty, n, m, cfg.noise_shape, cfg.noise_scale);
        let g = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::Invariant(format!("gamma draw: {e}")))?
            .sample(&mut rng_global);
        sigma2 = 1.0 / g;

        for (o, b) in beta_out.iter_mut().zip(&beta) {
            *o = b * scale;
        }
        let keep = sweep >= cfg.burn_in;
        if keep {
            kept += 1;
            for j in 0..m {
                sum_beta[j] += beta_out[j];
                sum_slab[j] += slab[j] as usize;
            }
            sum_sigma2 += sigma2;
            sum_w += w;
        }
        observe(&SweepState {
            sweep,
            kept: keep,
            beta: &beta_out,
            slab: &slab,
            sigma2,
            weight: w,
        });
    }

    let k = kept as f64;
    Ok(PosteriorSummary {
        post_mean_beta: sum_beta.iter().map(|s| s / k).collect(),
        inclusion_freq: sum_slab.iter().map(|&s| s as f64 / k).collect(),
        sampled_sigma2_mean: sum_sigma2 / k,
        weight_mean: sum_w / k,
        kept_sweeps: kept,
    })
}

/// Covariates by decreasing absolute posterior mean; ties keep index order.
pub fn rank_covariates(s: &PosteriorSummary) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.post_mean_beta.len()).collect();
    order.sort_by(|&a, &b| {
        s.post_mean_beta[b]
            .abs()
            .total_cmp(&s.post_mean_beta[a].abs())
            .then(a.cmp(&b))
    });
    order
}

/// OLS fits on growing prefixes of a ranking, with their Cp curve.
#[derive(Debug, Clone)]
pub struct RankedCp {
    pub path: PathFit,
    pub curve: CpCurve,
}

pub fn ranked_cp_curve(d: &StandardizedDataset, ranking: &[usize], sigma2: f64) -> Result<RankedCp> {
    let (n, m) = (d.n(), d.m());
    let y = d.response();
    let limit = ranking.len().min(n.saturating_sub(1));
    let mut qr = linalg::IncrementalQr::new(y);
    let mut active = Vec::with_capacity(limit);
    let mut steps = vec![PathStep {
        active: Vec::new(),
        coeffs: Array1::zeros(m),
        mu_hat: Array1::zeros(n),
        rss: linalg::norm_sq(y),
    }];
    let mut truncation = None;
    for (step, &j) in ranking.iter().take(limit).enumerate() {
        if j >= m {
            return Err(Error::IndexOutOfRange { index: j, len: m });
        }
        if qr.push(d.column(j)).is_err() {
            log::warn!("ranked prefix becomes rank deficient at column {j}; curve truncated");
            truncation = Some(Truncation::SingularGram {
                at_step: step + 1,
                candidate: j,
            });
            break;
        }
        active.push(j);
        let mut coeffs = Array1::zeros(m);
        for (&a, b) in active.iter().zip(qr.coefficients()) {
            coeffs[a] = b;
        }
        steps.push(PathStep {
            active: active.clone(),
            coeffs,
            mu_hat: Array1::from(qr.fitted()),
            rss: qr.rss(),
        });
    }
    let path = PathFit {
        method: Method::SvsRanked,
        steps,
        truncation,
        ties: Vec::new(),
    };
    let curve = path.cp_curve(sigma2)?;
    Ok(RankedCp { path, curve })
}

/// Model-averaged fit `Xs · E[β | y]`.
pub fn svs_bma_predict(s: &PosteriorSummary, d: &StandardizedDataset) -> Array1<f64> {
    d.predict(s.post_mean_beta.as_slice().expect("contiguous"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_by_absolute_mean() {
        let s = PosteriorSummary {
            post_mean_beta: Array1::from(vec![0.1, -0.5, 0.3]),
            inclusion_freq: Array1::zeros(3),
            sampled_sigma2_mean: 1.0,
            weight_mean: 0.5,
            kept_sweeps: 1,
        };
        assert_eq!(rank_covariates(&s), vec![1, 2, 0]);
        let z = PosteriorSummary {
            post_mean_beta: Array1::zeros(4),
            ..s
        };
        assert_eq!(rank_covariates(&z), vec![0, 1, 2, 3]);
    }

    #[test]
    fn config_validation() {
        assert!(SvsConfig::default().validate().is_ok());
        let c = SvsConfig {
            iterations: 10,
            burn_in: 10,
            ..SvsConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SvsConfig {
            spike_variance: 2.0,
            ..SvsConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn inclusion_probability_limits() {
        let p0 = inclusion_probability(0.0, 1.0, 0.5, 1e-4, 1.0);
        assert!(p0 < 0.02);
        let p1 = inclusion_probability(3.0, 1.0, 0.5, 1e-4, 1.0);
        assert!(p1 > 1.0 - 1e-12);
        // direct evaluation of the two weighted normal densities
        let (b, s2, w, v0, v1): (f64, f64, f64, f64, f64) = (0.02, 0.7, 0.3, 1e-3, 2.0);
        let dens = |v: f64| (-(b * b) / (2.0 * v * s2)).exp() / (2.0 * std::f64::consts::PI * v * s2).sqrt();
        let want = w * dens(v1) / (w * dens(v1) + (1.0 - w) * dens(v0));
        assert!((inclusion_probability(b, s2, w, v0, v1) - want).abs() < 1e-14);
    }
}
