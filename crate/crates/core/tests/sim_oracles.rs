use cpbench_core::sim::{
    ar1_quadratic_form, gen_random_orthogonal, simulate_with_truth, stream_rng, ClusterShape, Stream,
};
use cpbench_core::{build_cluster_beta, calibrate_beta, gen_ar1_covariates, simulate_dataset, SimScenario};
use ndarray::Array1;
use rand::RngCore;

fn dense_quadratic_form(beta: &Array1<f64>, rho: f64) -> f64 {
    let m = beta.len();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            total += beta[i] * beta[j] * rho.powi((i as i32 - j as i32).abs());
        }
    }
    total
}

#[test]
fn banded_quadratic_form_matches_dense() {
    let beta = build_cluster_beta(&SimScenario::default()).unwrap();
    for rho in [0.0, 0.5, 0.9] {
        let a = ar1_quadratic_form(&beta, rho);
        let b = dense_quadratic_form(&beta, rho);
        assert!((a - b).abs() < 1e-10 * b, "rho {rho}: {a} vs {b}");
    }
}

#[test]
fn cluster_layout() {
    let s = SimScenario::default();
    let beta = build_cluster_beta(&s).unwrap();
    let support: Vec<usize> = (0..400).filter(|&j| beta[j] != 0.0).collect();
    assert_eq!(support.len(), 105);
    // 1-based centres 25, 50, ..., 375; centre carries 4^1.25
    for c in (25..=375).step_by(25) {
        assert_eq!(beta[c - 1], 4f64.powf(1.25));
        assert_eq!(beta[c - 2], beta[c]);
        assert_eq!(beta[c - 4], 1.0);
        assert_eq!(beta[c - 5], 0.0);
        assert_eq!(beta[c + 3], 0.0);
    }
    let literal = SimScenario {
        shape: ClusterShape::Literal,
        ..SimScenario::default()
    };
    let lb = build_cluster_beta(&literal).unwrap();
    assert_eq!(lb[24], 4f64.powf(1.25));
    assert_eq!(lb[25], 3f64.powf(1.25));
    assert_eq!(lb[27], 1.0);
    assert_eq!(lb[21], 7f64.powf(1.25));
}

#[test]
fn calibration_constant_closed_form() {
    let base = build_cluster_beta(&SimScenario::default()).unwrap();
    // 15 clusters of 4^2.5 + 2(3^2.5 + 2^2.5 + 1)
    let q = 15.0 * (4f64.powf(2.5) + 2.0 * (3f64.powf(2.5) + 2f64.powf(2.5) + 1.0));
    let g = calibrate_beta(&base, 0.0, 0.75, 1.0).unwrap();
    let c = (3.0 / q).sqrt();
    assert!((g.calibration_constant - c).abs() < 1e-12);
    assert!((g.calibration_constant - 0.0511).abs() < 5e-4);
    assert!((g.theoretical_r2(1.0) - 0.75).abs() < 1e-12);
    let g9 = calibrate_beta(&base, 0.9, 0.75, 1.0).unwrap();
    assert!(g9.calibration_constant < g.calibration_constant);
    assert!((g9.theoretical_r2(1.0) - 0.75).abs() < 1e-12);
    assert_eq!(g9.nonzero_set.len(), 105);
}

#[test]
fn ar1_sample_correlations() {
    let n = 10_000;
    for rho in [0.0, 0.9] {
        let mut rng = stream_rng(5, Stream::Custom(9, 7));
        let x = gen_ar1_covariates(n, 6, rho, &mut rng).unwrap();
        let corr = |a: usize, b: usize| {
            let (ca, cb) = (x.column(a), x.column(b));
            let (ma, mb) = (ca.mean().unwrap(), cb.mean().unwrap());
            let cov: f64 = ca.iter().zip(cb.iter()).map(|(p, q)| (p - ma) * (q - mb)).sum();
            let va: f64 = ca.iter().map(|p| (p - ma).powi(2)).sum();
            let vb: f64 = cb.iter().map(|q| (q - mb).powi(2)).sum();
            cov / (va * vb).sqrt()
        };
        for j in 0..6 {
            let var = x.column(j).iter().map(|v| v * v).sum::<f64>() / n as f64;
            assert!((var - 1.0).abs() < 0.05, "rho {rho} col {j} var {var}");
        }
        if rho == 0.0 {
            assert!(corr(0, 1).abs() < 0.05);
            assert!(corr(2, 5).abs() < 0.05);
        } else {
            for j in 0..5 {
                assert!((corr(j, j + 1) - 0.9).abs() < 0.02);
            }
            assert!((corr(1, 3) - 0.81).abs() < 0.02);
        }
    }
}

#[test]
fn empirical_r2_near_target() {
    for rho in [0.0, 0.9] {
        let s = SimScenario {
            n: 20_000,
            ..SimScenario::default().with_rho(rho)
        };
        let truth = s.ground_truth().unwrap();
        let d = simulate_with_truth(&s, &truth, 0).unwrap();
        let mu = d.mu_true.as_ref().unwrap();
        let mean_mu = mu.mean().unwrap();
        let mean_y = d.y.mean().unwrap();
        let ss_mu: f64 = mu.iter().map(|v| (v - mean_mu).powi(2)).sum();
        let ss_y: f64 = d.y.iter().map(|v| (v - mean_y).powi(2)).sum();
        let r2 = ss_mu / ss_y;
        assert!((r2 - 0.75).abs() < 0.02, "rho {rho}: R² {r2}");
    }
}

#[test]
fn replications_are_reproducible_and_distinct() {
    let s = SimScenario {
        n: 50,
        m: 400,
        ..SimScenario::default()
    };
    let a = simulate_dataset(&s, 3).unwrap();
    let b = simulate_dataset(&s, 3).unwrap();
    let c = simulate_dataset(&s, 4).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.y, b.y);
    assert_ne!(a.y, c.y);
}

#[test]
fn pinned_stream_prefix() {
    let mut rng = stream_rng(42, Stream::Data(0));
    let got: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
    assert_eq!(
        got,
        [
            629220857678633262,
            1525128642534362311,
            16235084340552130026,
            3163420377530447412
        ]
    );
}

#[test]
fn orthogonal_rows_are_uniform() {
    // each of n = 10 basis rows should be chosen with probability m/n = 0.3;
    // chi-square over 4000 draws, 9 degrees of freedom, 99.9% point 27.9
    let (n, m, draws) = (10usize, 3usize, 4000usize);
    let mut counts = vec![0usize; n];
    let mut rng = stream_rng(8, Stream::Custom(10, 7));
    for _ in 0..draws {
        let od = gen_random_orthogonal(n, m, 1, &[1.0], &mut rng).unwrap();
        let mut rows = od.rows.clone();
        rows.sort();
        rows.dedup();
        assert_eq!(rows.len(), m);
        for r in rows {
            counts[r] += 1;
        }
    }
    let expect = (draws * m) as f64 / n as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    assert!(chi2 < 27.9, "chi-square {chi2}, counts {counts:?}");
}

#[test]
fn orthogonal_design_has_orthonormal_columns() {
    let mut rng = stream_rng(9, Stream::Custom(11, 7));
    let od = gen_random_orthogonal(30, 12, 4, &[2.0, 2.0, 1.0, 3.0], &mut rng).unwrap();
    let xtx = od.dataset.x.t().dot(&od.dataset.x);
    for i in 0..12 {
        for j in 0..12 {
            assert_eq!(xtx[[i, j]], if i == j { 1.0 } else { 0.0 });
        }
    }
    let beta = od.dataset.beta_true.as_ref().unwrap();
    assert_eq!(beta.iter().filter(|b| **b != 0.0).count(), 4);
    assert_eq!(beta[3].abs(), 3.0);
}

#[test]
fn invalid_scenarios_rejected() {
    let bad = [
        SimScenario {
            rho: 1.0,
            ..SimScenario::default()
        },
        SimScenario {
            r2: 1.0,
            ..SimScenario::default()
        },
        SimScenario {
            spacing: 6,
            ..SimScenario::default()
        },
        SimScenario {
            sigma2: -1.0,
            ..SimScenario::default()
        },
    ];
    for s in bad {
        assert!(s.ground_truth().is_err(), "{s:?}");
    }
}
