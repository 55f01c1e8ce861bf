//! Forward stepwise regression: at each step add the variable whose inclusion
//! gives the smallest residual sum of squares.

use ndarray::Array1;

use crate::linalg::{self, IncrementalQr, CONDITION_LIMIT};
use crate::model::StandardizedDataset;
use crate::path::{Method, PathFit, PathStep, Truncation};

/// Minimum RSS reduction for a candidate to be worth adding.
const MIN_GAIN: f64 = 1e-12;

/// At most `min(m, n - 1)` steps on centered data.
pub fn forward_stepwise_path(d: &StandardizedDataset, max_steps: usize) -> PathFit {
    forward_stepwise_columns(&d.columns(), d.response(), max_steps.min(d.n() - 1))
}

pub fn forward_stepwise_columns(columns: &[&[f64]], y: &[f64], max_steps: usize) -> PathFit {
    let n = y.len();
    let m = columns.len();
    let limit = max_steps.min(m).min(n);

    // candidates residualized against the active span, kept up to date with
    // one projection per step
    let mut resid_cols: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let orig_norms: Vec<f64> = columns.iter().map(|c| linalg::norm_sq(c).sqrt()).collect();
    let mut usable = vec![true; m];
    let mut qr = IncrementalQr::new(y);
    let mut active: Vec<usize> = Vec::with_capacity(limit);
    let mut ties = Vec::new();
    let mut truncation = None;

    let mut steps = vec![PathStep {
        active: Vec::new(),
        coeffs: Array1::zeros(m),
        mu_hat: Array1::zeros(n),
        rss: linalg::norm_sq(y),
    }];

    'steps: for step in 1..=limit {
        loop {
            let r = qr.residual();
            let mut gains: Vec<(usize, f64)> = Vec::new();
            let mut best = 0.0f64;
            for j in 0..m {
                if !usable[j] {
                    continue;
                }
                let z = &resid_cols[j];
                let zz = linalg::norm_sq(z);
                if zz.sqrt() <= orig_norms[j] / CONDITION_LIMIT {
                    log::debug!("stepwise: column {j} lies in the active span; skipped");
                    usable[j] = false;
                    continue;
                }
                let zr = linalg::dot(z, r);
                let g = zr * zr / zz;
                gains.push((j, g));
                best = best.max(g);
            }
            if !(best > MIN_GAIN * linalg::norm_sq(y).max(f64::MIN_POSITIVE)) {
                truncation = Some(Truncation::NoImprovement { at_step: step });
                break 'steps;
            }
            let tied: Vec<usize> = gains
                .iter()
                .filter(|(_, g)| *g >= best * (1.0 - 1e-12))
                .map(|(j, _)| *j)
                .collect();
            let pick = tied[0];
            if tied.len() > 1 {
                log::debug!("stepwise: tie at step {step} among {tied:?}");
                ties.push((step, pick));
            }
            if qr.push(columns[pick]).is_err() {
                log::debug!("stepwise: singular augmented Gram for column {pick}; skipped");
                usable[pick] = false;
                if !usable.iter().any(|u| *u) {
                    truncation = Some(Truncation::SingularGram {
                        at_step: step,
                        candidate: pick,
                    });
                    break 'steps;
                }
                continue;
            }
            usable[pick] = false;
            active.push(pick);
            let q = qr.basis().last().expect("just pushed").clone();
            for j in (0..m).filter(|&j| usable[j]) {
                let c = linalg::dot(&q, &resid_cols[j]);
                linalg::axpy(-c, &q, &mut resid_cols[j]);
            }
            break;
        }

        let coef = qr.coefficients();
        let mut coeffs = Array1::zeros(m);
        for (&j, &b) in active.iter().zip(&coef) {
            coeffs[j] = b;
        }
        steps.push(PathStep {
            active: active.clone(),
            coeffs,
            mu_hat: Array1::from(qr.fitted()),
            rss: qr.rss(),
        });
    }

    PathFit {
        method: Method::Stepwise,
        steps,
        truncation,
        ties,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_is_simple_regression() {
        let x = [0.5, -0.5, 0.0, 0.0];
        let norm = linalg::norm_sq(&x).sqrt();
        let x: Vec<f64> = x.iter().map(|v| v / norm).collect();
        let y = [2.0, -1.0, 0.3, -1.3];
        let p = forward_stepwise_columns(&[&x], &y, 1);
        assert_eq!(p.len(), 2);
        let b = linalg::dot(&x, &y);
        assert!((p.steps[1].coeffs[0] - b).abs() < 1e-12);
    }

    #[test]
    fn duplicate_column_is_skipped() {
        let a = [1.0, 0.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0, 0.0];
        let y = [3.0, 1.0, 0.5, 0.0];
        let p = forward_stepwise_columns(&[&a, &a, &b], &y, 3);
        assert_eq!(p.steps[1].active, vec![0]);
        assert_eq!(p.steps[2].active, vec![0, 2]);
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn stops_without_improvement() {
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        let y = [3.0, 0.0, 0.0];
        let p = forward_stepwise_columns(&[&a, &b], &y, 2);
        assert_eq!(p.len(), 2);
        assert_eq!(p.truncation, Some(Truncation::NoImprovement { at_step: 2 }));
    }
}
