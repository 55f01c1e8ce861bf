//! Variable selection with Mallows' Cp: least angle regression, forward
//! stepwise regression and spike-and-slab stochastic variable selection,
//! plus the simulation and orthogonal-design tooling used to compare them.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` is how NaN gets rejected

pub mod bench;
pub mod config;
pub mod error;
pub mod io;
pub mod lars;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod path;
pub mod sim;
pub mod stepwise;
pub mod svs;
pub mod theory;

pub use error::{Error, Result};
pub use lars::{lars_cp_curve, lars_path, soft_threshold_fit};
pub use metrics::{
    aggregate_replications, confusion_counts, proportion_explained, BenchMethod, ConfusionCounts, MetricsRow,
    RepMetrics,
};
pub use model::{
    cp_value, estimate_sigma2_full, ols_subset, standardize, CpCurve, CpEntry, Dataset, NoiseVariance,
    StandardizedDataset, SubsetFit,
};
pub use path::{select_min_cp, Method, PathFit, PathStep, Selection, Truncation};
pub use sim::{
    build_cluster_beta, calibrate_beta, gen_ar1_covariates, gen_random_orthogonal, simulate_dataset, GroundTruth,
    SimScenario,
};
pub use stepwise::forward_stepwise_path;
pub use svs::{rank_covariates, ranked_cp_curve, svs_bma_predict, svs_gibbs, PosteriorSummary, SvsConfig};
pub use theory::{b_k_count, cp_gap_closed_form, mc_overfit_experiment, order_stat_v, OrthoInstance};
