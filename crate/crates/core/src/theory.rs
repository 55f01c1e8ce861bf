//! Cp behaviour of LARS in random orthogonal designs.
//!
//! With orthonormal columns the step-k LARS fit soft-thresholds the design
//! responses at `V_k`, the `(k+1)`-st largest absolute response. Everything
//! here uses σ² = 1. Responses at basis coordinates outside the design add
//! the same amount to every RSS and cancel in Cp differences.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lars::{soft_threshold_fit, threshold_at};
use crate::model::cp_value;
use crate::sim::{gen_random_orthogonal, stream_rng, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoInstance {
    pub yvals: Vec<f64>,
    pub k0: usize,
    /// `|yvals|` in descending order.
    pub abs_sorted: Vec<f64>,
}

impl OrthoInstance {
    pub fn new(yvals: Vec<f64>, k0: usize) -> Result<Self> {
        if k0 > yvals.len() {
            return Err(Error::OutOfRange(format!("k0 = {k0} exceeds m = {}", yvals.len())));
        }
        if yvals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite response".into()));
        }
        let mut abs_sorted: Vec<f64> = yvals.iter().map(|v| v.abs()).collect();
        abs_sorted.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { yvals, k0, abs_sorted })
    }

    pub fn m(&self) -> usize {
        self.yvals.len()
    }

    /// Threshold used at step k, with `V_m = 0`.
    fn v(&self, k: usize) -> f64 {
        threshold_at(&self.abs_sorted, k)
    }

    /// Design-coordinate RSS of the step-k soft-threshold fit:
    /// `k·V_k² + Σ_{i≥k} a_i²` over the sorted absolute values.
    pub fn soft_threshold_rss(&self, k: usize) -> f64 {
        let v = self.v(k);
        k as f64 * v * v + self.abs_sorted[k.min(self.m())..].iter().map(|a| a * a).sum::<f64>()
    }
}

/// `(j+1)`-st largest absolute response.
pub fn order_stat_v(inst: &OrthoInstance, j: usize) -> Result<f64> {
    inst.abs_sorted
        .get(j)
        .copied()
        .ok_or_else(|| Error::OutOfRange(format!("order statistic index {j} outside 0..{}", inst.m())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpGapReport {
    pub k: usize,
    pub k0: usize,
    /// `Cp(k) - Cp(k0)` evaluated term by term.
    pub gap_exact: f64,
    /// `-Δ_k B_k + 2(k - k0)`.
    pub bound: f64,
    pub delta_k: f64,
    pub b_k: usize,
    /// `V_k` or `V_k0` is shared by more than one response.
    pub tied: bool,
}

fn has_tie_at(sorted: &[f64], idx: usize) -> bool {
    if idx >= sorted.len() {
        return false;
    }
    let v = sorted[idx];
    (idx > 0 && sorted[idx - 1] == v) || (idx + 1 < sorted.len() && sorted[idx + 1] == v)
}

/// The closed-form Cp difference between steps `k` and `k0` and its upper
/// bound. Fails with [`Error::Invariant`] if the bound is violated.
pub fn cp_gap_closed_form(inst: &OrthoInstance, k: usize, k0: usize) -> Result<CpGapReport> {
    let m = inst.m();
    if !(1 <= k0 && k0 < k && k <= m) {
        return Err(Error::OutOfRange(format!(
            "need 1 <= k0 < k <= m, got k0 = {k0}, k = {k}, m = {m}"
        )));
    }
    let (vk, vk0) = (inst.v(k), inst.v(k0));
    let (vk2, vk02) = (vk * vk, vk0 * vk0);
    let mut above = 0usize;
    let mut between = 0usize;
    let mut between_ss = 0.0;
    for y in &inst.yvals {
        let a = y.abs();
        if a > vk0 {
            above += 1;
        } else if a > vk {
            between += 1;
            between_ss += y * y;
        }
    }
    let dk = 2.0 * (k - k0) as f64;
    let gap_exact = (vk2 - vk02) * above as f64 + vk2 * between as f64 - between_ss + dk;
    let delta_k = vk02 - vk2;
    let bound = -delta_k * above as f64 + dk;
    let report = CpGapReport {
        k,
        k0,
        gap_exact,
        bound,
        delta_k,
        b_k: above,
        tied: has_tie_at(&inst.abs_sorted, k0) || has_tie_at(&inst.abs_sorted, k),
    };
    let slack = 1e-9 * (1.0 + bound.abs().max(gap_exact.abs()));
    if gap_exact > bound + slack {
        return Err(Error::Invariant(format!(
            "Cp gap {gap_exact} exceeds bound {bound} at k = {k}, k0 = {k0}"
        )));
    }
    Ok(report)
}

/// `Cp(k) - Cp(k0)` from the residual sums of squares of the two
/// soft-threshold fits.
pub fn cp_gap_direct(inst: &OrthoInstance, k: usize, k0: usize) -> Result<f64> {
    let rss = |k: usize| -> f64 {
        let fit = soft_threshold_fit(&inst.yvals, k);
        inst.yvals.iter().zip(&fit.fitted).map(|(y, f)| (y - f) * (y - f)).sum()
    };
    let m = inst.m();
    Ok(cp_value(rss(k), 1.0, m, k)? - cp_value(rss(k0), 1.0, m, k0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BkCount {
    pub count: usize,
    pub tied: bool,
}

/// Number of absolute responses strictly above `V_k0`.
pub fn b_k_count(inst: &OrthoInstance, k0: usize) -> Result<BkCount> {
    if k0 >= inst.m() {
        return Err(Error::OutOfRange(format!("k0 = {k0} must be below m = {}", inst.m())));
    }
    let v = inst.abs_sorted[k0];
    let count = inst.yvals.iter().filter(|y| y.abs() > v).count();
    Ok(BkCount {
        count,
        tied: has_tie_at(&inst.abs_sorted, k0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverfitParams {
    pub m: usize,
    pub n: usize,
    pub k0: usize,
    pub signal_scale: f64,
    /// Per-coefficient magnitudes (multiplied by `signal_scale`). When absent
    /// every true coefficient has magnitude `signal_scale`.
    pub profile: Option<Vec<f64>>,
    pub reps: usize,
    pub seed: u64,
}

impl OverfitParams {
    pub fn magnitudes(&self) -> Result<Vec<f64>> {
        match &self.profile {
            None => Ok(vec![self.signal_scale; self.k0]),
            Some(p) if p.len() == self.k0 => Ok(p.iter().map(|v| v * self.signal_scale).collect()),
            Some(p) => Err(Error::InvalidScenario(format!(
                "magnitude profile has {} entries for k0 = {}",
                p.len(),
                self.k0
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepOutcome {
    pub rep: usize,
    pub k_hat: usize,
    /// `B_k` at the true dimension (when `k0 < m`).
    pub b_k: Option<BkCount>,
    /// Gap between the selected and true dimensions when `k_hat > k0 >= 1`.
    pub gap: Option<CpGapReport>,
    pub cp: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub k: usize,
    pub mean_cp: f64,
    pub sd_cp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverfitReport {
    pub params: OverfitParams,
    pub outcomes: Vec<RepOutcome>,
    pub mean_curve: Vec<CurvePoint>,
    /// Fraction of replications with `k_hat > k0`.
    pub p_overfit: f64,
    /// Histogram of `k_hat - k0`.
    pub excess_histogram: BTreeMap<i64, usize>,
    /// Histogram of `B_k` values.
    pub b_k_histogram: BTreeMap<usize, usize>,
}

fn run_rep(p: &OverfitParams, mags: &[f64], rep: usize) -> Result<RepOutcome> {
    let mut rng = stream_rng(p.seed, Stream::Orthogonal(rep as u64));
    let od = gen_random_orthogonal(p.n, p.m, p.k0, mags, &mut rng)?;
    let off = od.off_design_ss();
    let inst = OrthoInstance::new(od.design_responses(), p.k0)?;
    let cp: Vec<f64> = (0..=p.m)
        .map(|k| cp_value(inst.soft_threshold_rss(k) + off, 1.0, p.n, k))
        .collect::<Result<_>>()?;
    let mut k_hat = 0;
    for (k, c) in cp.iter().enumerate() {
        if *c < cp[k_hat] {
            k_hat = k;
        }
    }
    let b_k = if p.k0 < p.m {
        Some(b_k_count(&inst, p.k0)?)
    } else {
        None
    };
    let gap = if p.k0 >= 1 && k_hat > p.k0 {
        Some(cp_gap_closed_form(&inst, k_hat, p.k0)?)
    } else {
        None
    };
    Ok(RepOutcome {
        rep,
        k_hat,
        b_k,
        gap,
        cp,
    })
}

/// Repeated orthogonal-design experiments recording the min-Cp dimension.
pub fn mc_overfit_experiment(p: &OverfitParams) -> Result<OverfitReport> {
    if p.reps == 0 {
        return Err(Error::OutOfRange("reps must be positive".into()));
    }
    let mags = p.magnitudes()?;
    let outcomes: Vec<RepOutcome> = (0..p.reps)
        .into_par_iter()
        .map(|rep| run_rep(p, &mags, rep))
        .collect::<Result<_>>()?;

    let reps = outcomes.len() as f64;
    let mean_curve = (0..=p.m)
        .map(|k| {
            let mean = outcomes.iter().map(|o| o.cp[k]).sum::<f64>() / reps;
            let var = if outcomes.len() > 1 {
                outcomes.iter().map(|o| (o.cp[k] - mean).powi(2)).sum::<f64>() / (reps - 1.0)
            } else {
                0.0
            };
            CurvePoint {
                k,
                mean_cp: mean,
                sd_cp: var.sqrt(),
            }
        })
        .collect();
    let mut excess_histogram = BTreeMap::new();
    let mut b_k_histogram = BTreeMap::new();
    for o in &outcomes {
        *excess_histogram.entry(o.k_hat as i64 - p.k0 as i64).or_insert(0) += 1;
        if let Some(b) = o.b_k {
            *b_k_histogram.entry(b.count).or_insert(0) += 1;
        }
    }
    let p_overfit = outcomes.iter().filter(|o| o.k_hat > p.k0).count() as f64 / reps;
    Ok(OverfitReport {
        params: p.clone(),
        outcomes,
        mean_curve,
        p_overfit,
        excess_histogram,
        b_k_histogram,
    })
}

/// One randomized check of the closed-form gap against direct RSS.
#[derive(Debug, Clone, PartialEq)]
pub struct GapCheck {
    pub instance: usize,
    pub m: usize,
    pub report: CpGapReport,
    pub gap_direct: f64,
}

impl GapCheck {
    pub fn relative_error(&self) -> f64 {
        (self.report.gap_exact - self.gap_direct).abs() / (1.0 + self.gap_direct.abs())
    }
}

/// Random instance `i`: `k0 ∈ [1, m)` signals of size U(0, 5) with random
/// signs plus unit noise, and a comparison step `k ∈ (k0, m]`.
pub fn random_gap_instance(seed: u64, i: usize, m: usize) -> Result<(OrthoInstance, usize)> {
    if m < 2 {
        return Err(Error::OutOfRange(format!("gap instances need m >= 2, got {m}")));
    }
    let mut rng = stream_rng(seed, Stream::Custom(i as u64, 1));
    let k0 = rng.random_range(1..m);
    let k = rng.random_range(k0 + 1..=m);
    let scale: f64 = rng.random_range(0.0..5.0);
    let yvals = (0..m)
        .map(|j| {
            let signal = if j < k0 {
                if rng.random::<bool>() {
                    scale
                } else {
                    -scale
                }
            } else {
                0.0
            };
            signal + rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    Ok((OrthoInstance::new(yvals, k0)?, k))
}

/// Closed form vs direct RSS on `count` random instances of size `m`. Fails
/// with [`Error::Invariant`] on a bound violation or a relative mismatch
/// above `tol`.
pub fn gap_identity_check(seed: u64, count: usize, m: usize, tol: f64) -> Result<Vec<GapCheck>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let (inst, k) = random_gap_instance(seed, i, m)?;
            let report = cp_gap_closed_form(&inst, k, inst.k0)?;
            let gap_direct = cp_gap_direct(&inst, k, inst.k0)?;
            let check = GapCheck {
                instance: i,
                m,
                report,
                gap_direct,
            };
            if !(check.relative_error() <= tol) {
                return Err(Error::Invariant(format!(
                    "instance {i}: closed-form gap {} differs from direct {}",
                    check.report.gap_exact, check.gap_direct
                )));
            }
            Ok(check)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_statistics_by_definition() {
        let inst = OrthoInstance::new(vec![-3.0, 1.0, 5.0], 1).unwrap();
        assert_eq!(order_stat_v(&inst, 0).unwrap(), 5.0);
        assert_eq!(order_stat_v(&inst, 1).unwrap(), 3.0);
        assert_eq!(order_stat_v(&inst, 2).unwrap(), 1.0);
        assert!(order_stat_v(&inst, 3).is_err());
        let flat = OrthoInstance::new(vec![2.0, -2.0, 2.0, 2.0], 1).unwrap();
        assert!((0..4).all(|j| order_stat_v(&flat, j).unwrap() == 2.0));
    }

    #[test]
    fn tied_order_statistics_give_pure_penalty() {
        // V_2 = V_3 = 2
        let inst = OrthoInstance::new(vec![9.0, 4.0, 2.0, -2.0, 0.5], 2).unwrap();
        let r = cp_gap_closed_form(&inst, 3, 2).unwrap();
        assert_eq!(r.gap_exact, 2.0);
        assert_eq!(r.delta_k, 0.0);
        assert!(r.tied);
    }

    #[test]
    fn gap_regime_checked() {
        let inst = OrthoInstance::new(vec![3.0, 2.0, 1.0], 2).unwrap();
        assert!(cp_gap_closed_form(&inst, 2, 2).is_err());
        assert!(cp_gap_closed_form(&inst, 1, 0).is_err());
        assert!(cp_gap_closed_form(&inst, 4, 1).is_err());
    }

    #[test]
    fn b_k_counts_strictly_above() {
        let inst = OrthoInstance::new(vec![5.0, -4.0, 3.0, 1.0], 2).unwrap();
        assert_eq!(b_k_count(&inst, 2).unwrap(), BkCount { count: 2, tied: false });
        let tied = OrthoInstance::new(vec![5.0, 3.0, -3.0, 1.0], 2).unwrap();
        let b = b_k_count(&tied, 2).unwrap();
        assert_eq!(b.count, 1);
        assert!(b.tied);
    }

    #[test]
    fn rss_shortcut_matches_fit() {
        let inst = OrthoInstance::new(vec![0.3, -2.0, 1.7, 4.0, -0.9], 2).unwrap();
        for k in 0..=5 {
            let fit = soft_threshold_fit(&inst.yvals, k);
            let direct: f64 = inst.yvals.iter().zip(&fit.fitted).map(|(y, f)| (y - f).powi(2)).sum();
            assert!((direct - inst.soft_threshold_rss(k)).abs() < 1e-12);
        }
    }
}
