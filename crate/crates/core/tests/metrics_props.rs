use cpbench_core::metrics::{aggregate_replications, MeanSe};
use cpbench_core::{confusion_counts, proportion_explained, BenchMethod, RepMetrics};
use ndarray::Array1;
use proptest::prelude::*;

fn relabel(set: &[usize], perm: &[usize]) -> Vec<usize> {
    set.iter().map(|&j| perm[j]).collect()
}

proptest! {
    #[test]
    fn counts_survive_relabelling(
        sel in proptest::collection::btree_set(0usize..30, 0..30),
        truth in proptest::collection::btree_set(0usize..30, 0..30),
        perm in Just((0..30).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let sel: Vec<usize> = sel.into_iter().collect();
        let truth: Vec<usize> = truth.into_iter().collect();
        let a = confusion_counts(&sel, &truth, 30).unwrap();
        let b = confusion_counts(&relabel(&sel, &perm), &relabel(&truth, &perm), 30).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(a.tp + a.fp + a.tn + a.fn_, 30);
        prop_assert!((0.0..=1.0).contains(&a.fdr()) && (0.0..=1.0).contains(&a.fnr()));
    }

    #[test]
    fn aggregation_ignores_record_order(
        vals in proptest::collection::vec((0usize..50, 0.0f64..1.0), 2..20),
        perm_seed in any::<u64>(),
    ) {
        let recs: Vec<RepMetrics> = vals
            .iter()
            .map(|&(k, pe)| RepMetrics {
                method: BenchMethod::Lars,
                m_hat: k,
                pe,
                counts: confusion_counts(&(0..k).collect::<Vec<_>>(), &[0, 1], 50).unwrap(),
            })
            .collect();
        let mut shuffled = recs.clone();
        let len = shuffled.len();
        shuffled.rotate_left((perm_seed as usize) % len);
        shuffled.reverse();
        prop_assert_eq!(aggregate_replications(&recs), aggregate_replications(&shuffled));
    }

    #[test]
    fn pe_is_one_only_for_exact_fits(mu in proptest::collection::vec(-5.0f64..5.0, 3..20), shift in 0.01f64..2.0) {
        let mu = Array1::from(mu);
        prop_assume!(mu.iter().any(|v| (v - mu[0]).abs() > 1e-3));
        prop_assert!((proportion_explained(&mu, &mu).unwrap() - 1.0).abs() < 1e-12);
        let mut off = mu.clone();
        off[0] += shift;
        prop_assert!(proportion_explained(&off, &mu).unwrap() < 1.0);
    }
}

#[test]
fn standard_error_of_known_sample() {
    let s = MeanSe::of(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(s.mean, 2.5);
    // sample sd √(5/3), se = sd / 2
    assert!((s.se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
}
