//! Least angle regression (no lasso modification).
//!
//! The path starts at the empty model and adds one variable per step. Between
//! entries the fit moves along the equiangular direction of the signed active
//! columns until an inactive column reaches the same absolute correlation
//! with the residual. The final step jumps to the least-squares fit on the
//! active set.

use ndarray::Array1;

use crate::error::Result;
use crate::linalg::{self, PackedCholesky};
use crate::model::{CpCurve, StandardizedDataset};
use crate::path::{Method, PathFit, PathStep, Truncation};

/// Relative tolerance used to detect ties in the entry competition.
const TIE_RTOL: f64 = 1e-12;

/// LARS on standardized data. Centering costs one degree of freedom, so the
/// path stops after at most `min(m, n - 1)` steps.
pub fn lars_path(d: &StandardizedDataset, max_steps: usize) -> PathFit {
    lars_path_columns(&d.columns(), d.response(), max_steps.min(d.n() - 1))
}

/// LARS on arbitrary columns. Columns are expected to have unit norm; the
/// algorithm itself only needs them to be linearly independent. The last
/// possible step (`min(m, n)` active variables) is the least-squares fit;
/// shorter requested paths end at the ordinary LARS point.
pub fn lars_path_columns(columns: &[&[f64]], y: &[f64], max_steps: usize) -> PathFit {
    let n = y.len();
    let m = columns.len();
    let terminal = m.min(n);
    let limit = max_steps.min(terminal);

    let mut mu = vec![0.0; n];
    let mut beta = vec![0.0; m];
    let mut active: Vec<usize> = Vec::with_capacity(limit);
    let mut signs: Vec<f64> = Vec::with_capacity(limit);
    let mut is_active = vec![false; m];
    let mut gram = PackedCholesky::with_capacity(limit);
    let mut ties = Vec::new();
    let mut truncation = None;

    let mut steps = vec![PathStep {
        active: Vec::new(),
        coeffs: Array1::zeros(m),
        mu_hat: Array1::zeros(n),
        rss: linalg::norm_sq(y),
    }];
    if limit == 0 {
        return PathFit {
            method: Method::Lars,
            steps,
            truncation,
            ties,
        };
    }

    let correlations = |mu: &[f64]| -> Vec<f64> {
        let resid: Vec<f64> = y.iter().zip(mu).map(|(a, b)| a - b).collect();
        columns.iter().map(|c| linalg::dot(c, &resid)).collect()
    };

    // first entrant: largest absolute correlation, lowest index on ties
    let mut corr = correlations(&mu);
    let mut next = {
        let best = corr.iter().map(|c| c.abs()).fold(0.0f64, f64::max);
        let tied: Vec<usize> = (0..m).filter(|&j| corr[j].abs() >= best * (1.0 - TIE_RTOL)).collect();
        if tied.len() > 1 {
            log::debug!("lars: tie at entry among {tied:?}");
            ties.push((1, tied[0]));
        }
        tied[0]
    };

    for step in 1..=limit {
        // admit `next`
        let sign = if corr[next] >= 0.0 { 1.0 } else { -1.0 };
        let xj = columns[next];
        let cross: Vec<f64> = active
            .iter()
            .zip(&signs)
            .map(|(&a, &s)| s * sign * linalg::dot(columns[a], xj))
            .collect();
        if gram.append(&cross, linalg::norm_sq(xj)).is_err() {
            log::warn!("lars: singular active Gram when adding column {next} at step {step}");
            truncation = Some(Truncation::SingularGram {
                at_step: step,
                candidate: next,
            });
            break;
        }
        active.push(next);
        signs.push(sign);
        is_active[next] = true;

        let big_c = active.iter().map(|&a| corr[a].abs()).fold(0.0f64, f64::max);

        // equiangular direction
        let mut gi1 = vec![1.0; active.len()];
        gram.solve(&mut gi1);
        let a_a = 1.0 / gi1.iter().sum::<f64>().sqrt();
        let w: Vec<f64> = gi1.iter().map(|g| g * a_a).collect();
        let mut u = vec![0.0; n];
        for ((&a, &s), &wi) in active.iter().zip(&signs).zip(&w) {
            linalg::axpy(s * wi, columns[a], &mut u);
        }

        let full_step = big_c / a_a;
        let mut gamma = full_step;
        let mut entrant = None;
        if step < terminal {
            let mut best = f64::INFINITY;
            let mut cands: Vec<(usize, f64)> = Vec::new();
            for j in (0..m).filter(|&j| !is_active[j]) {
                let aj = linalg::dot(columns[j], &u);
                let cj = corr[j];
                let mut g = f64::INFINITY;
                // inactive |c_j| never exceeds C; clamp rounding so exact ties
                // enter with a zero-length move
                for (num, den) in [(big_c - cj, a_a - aj), (big_c + cj, a_a + aj)] {
                    if den > 0.0 {
                        let v = num.max(0.0) / den;
                        if v < g {
                            g = v;
                        }
                    }
                }
                if g.is_finite() {
                    cands.push((j, g));
                    best = best.min(g);
                }
            }
            if best.is_finite() && best <= full_step {
                let tied: Vec<usize> = cands
                    .iter()
                    .filter(|(_, g)| *g <= best * (1.0 + TIE_RTOL))
                    .map(|(j, _)| *j)
                    .collect();
                if tied.len() > 1 {
                    log::debug!("lars: tie at step {} among {tied:?}", step + 1);
                    ties.push((step + 1, tied[0]));
                }
                gamma = best;
                entrant = Some(tied[0]);
            }
        }

        linalg::axpy(gamma, &u, &mut mu);
        for ((&a, &s), &wi) in active.iter().zip(&signs).zip(&w) {
            beta[a] += gamma * s * wi;
        }
        let rss = y.iter().zip(&mu).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        steps.push(PathStep {
            active: active.clone(),
            coeffs: Array1::from(beta.clone()),
            mu_hat: Array1::from(mu.clone()),
            rss,
        });

        match entrant {
            Some(_) if step == limit => break,
            Some(j) => {
                next = j;
                corr = correlations(&mu);
            }
            None => {
                if step < terminal {
                    truncation = Some(Truncation::NoImprovement { at_step: step });
                }
                break;
            }
        }
    }

    PathFit {
        method: Method::Lars,
        steps,
        truncation,
        ties,
    }
}

pub fn lars_cp_curve(path: &PathFit, sigma2: f64) -> Result<CpCurve> {
    path.cp_curve(sigma2)
}

/// `(k+1)`-st largest absolute value, with the convention `V_m = 0`.
pub fn threshold_at(abs_sorted_desc: &[f64], k: usize) -> f64 {
    abs_sorted_desc.get(k).copied().unwrap_or(0.0)
}

/// Soft-threshold fit at the `(k+1)`-st largest absolute response.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftThresholdFit {
    pub fitted: Vec<f64>,
    pub threshold: f64,
    /// More or fewer than `k` coordinates survived because of tied values.
    pub tied: bool,
}

/// Coordinate j maps to `sign(Y_j) · max(|Y_j| − V_k, 0)`. `k = m` gives the
/// identity (threshold 0), which is the terminal LARS step.
pub fn soft_threshold_fit(yvals: &[f64], k: usize) -> SoftThresholdFit {
    assert!(k <= yvals.len(), "k = {k} exceeds {} coordinates", yvals.len());
    let mut abs: Vec<f64> = yvals.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| b.total_cmp(a));
    let v = threshold_at(&abs, k);
    let fitted: Vec<f64> = yvals.iter().map(|&y| y.signum() * (y.abs() - v).max(0.0)).collect();
    let nonzero = fitted.iter().filter(|f| **f != 0.0).count();
    SoftThresholdFit {
        fitted,
        threshold: v,
        tied: nonzero != k && k < yvals.len(),
    }
}
