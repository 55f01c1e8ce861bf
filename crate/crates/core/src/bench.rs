//! One replication of the four-method comparison and its aggregation.

use rand::RngCore;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lars::lars_path;
use crate::metrics::{aggregate_replications, BenchMethod, MetricsRow, RepMetrics};
use crate::model::{estimate_sigma2_full, standardize, CpCurve, StandardizedDataset};
use crate::path::{select_min_cp, PathFit, Selection};
use crate::sim::{simulate_with_truth, stream_rng, GroundTruth, SimScenario, Stream};
use crate::stepwise::forward_stepwise_path;
use crate::svs::{rank_covariates, ranked_cp_curve, svs_bma_predict, svs_gibbs, PosteriorSummary, SvsConfig};

/// Chain seed for replication `rep`: a draw from the scenario's SVS stream
/// mixed with the sampler's own seed.
pub fn chain_seed(scenario_seed: u64, svs_seed: u64, rep: u64) -> u64 {
    stream_rng(scenario_seed, Stream::Svs(rep)).next_u64() ^ svs_seed
}

/// Everything the selection procedures produce on one standardized dataset.
#[derive(Debug, Clone)]
pub struct MethodFits {
    pub sigma2: f64,
    pub lars: PathFit,
    pub lars_curve: CpCurve,
    pub lars_selection: Selection,
    pub step: PathFit,
    pub step_curve: CpCurve,
    pub step_selection: Selection,
    pub posterior: PosteriorSummary,
    pub ranking: Vec<usize>,
    pub svs_path: PathFit,
    pub svs_curve: CpCurve,
    pub svs_selection: Selection,
}

/// Run LARS, forward stepwise and SVS with min-Cp selection on shared σ̂².
pub fn fit_all(s: &StandardizedDataset, svs: &SvsConfig, sigma2: Option<f64>) -> Result<MethodFits> {
    let sigma2 = match sigma2 {
        Some(v) => v,
        None => estimate_sigma2_full(s)?.value()?,
    };
    let max_steps = s.m().min(s.n() - 1);

    let lars = lars_path(s, max_steps);
    let lars_curve = lars.cp_curve(sigma2)?;
    let lars_selection = select_min_cp(&lars_curve, &lars)?;

    let step = forward_stepwise_path(s, max_steps);
    let step_curve = step.cp_curve(sigma2)?;
    let step_selection = select_min_cp(&step_curve, &step)?;

    let posterior = svs_gibbs(s, svs)?;
    let ranking = rank_covariates(&posterior);
    let ranked = ranked_cp_curve(s, &ranking, sigma2)?;
    let svs_selection = select_min_cp(&ranked.curve, &ranked.path)?;

    Ok(MethodFits {
        sigma2,
        lars,
        lars_curve,
        lars_selection,
        step,
        step_curve,
        step_selection,
        posterior,
        ranking,
        svs_path: ranked.path,
        svs_curve: ranked.curve,
        svs_selection,
    })
}

/// What a replication keeps once its paths are no longer needed.
#[derive(Debug, Clone)]
pub struct RepResult {
    pub rep: u64,
    pub chain_seed: u64,
    pub sigma2: f64,
    pub metrics: Vec<RepMetrics>,
    pub lars_curve: CpCurve,
    pub step_curve: CpCurve,
    pub svs_curve: CpCurve,
    pub lars_selection: Selection,
    pub step_selection: Selection,
    pub svs_selection: Selection,
}

pub fn run_replication(scenario: &SimScenario, truth: &GroundTruth, svs: &SvsConfig, rep: u64) -> Result<RepResult> {
    let d = simulate_with_truth(scenario, truth, rep)?;
    let s = standardize(&d)?;
    let seed = chain_seed(scenario.seed, svs.seed, rep);
    let cfg = SvsConfig { seed, ..svs.clone() };
    let fits = fit_all(&s, &cfg, None)?;
    let mu = s
        .mu_centered
        .as_ref()
        .ok_or_else(|| Error::InvalidData("simulated data lacks a true mean".into()))?;
    let support = &truth.nonzero_set;
    let m = s.m();

    let from_selection = |method, sel: &Selection, path: &PathFit| {
        RepMetrics::new(method, &sel.active, support, m, &path.steps[sel.step].mu_hat, mu)
    };
    let all: Vec<usize> = (0..m).collect();
    let metrics = vec![
        from_selection(BenchMethod::Lars, &fits.lars_selection, &fits.lars)?,
        from_selection(BenchMethod::SvsCp, &fits.svs_selection, &fits.svs_path)?,
        RepMetrics::new(
            BenchMethod::SvsBma,
            &all,
            support,
            m,
            &svs_bma_predict(&fits.posterior, &s),
            mu,
        )?,
        from_selection(BenchMethod::Step, &fits.step_selection, &fits.step)?,
    ];
    Ok(RepResult {
        rep,
        chain_seed: seed,
        sigma2: fits.sigma2,
        metrics,
        lars_curve: fits.lars_curve,
        step_curve: fits.step_curve,
        svs_curve: fits.svs_curve,
        lars_selection: fits.lars_selection,
        step_selection: fits.step_selection,
        svs_selection: fits.svs_selection,
    })
}

/// Replications that finished and those that failed.
#[derive(Debug)]
pub struct ScenarioRun {
    pub scenario: SimScenario,
    pub results: Vec<RepResult>,
    pub failures: Vec<(u64, String)>,
}

impl ScenarioRun {
    pub fn table(&self) -> Vec<MetricsRow> {
        let records: Vec<RepMetrics> = self.results.iter().flat_map(|r| r.metrics.iter().copied()).collect();
        aggregate_replications(&records)
    }
}

/// Run `reps` replications; failures are recorded rather than propagated.
pub fn run_scenario(scenario: &SimScenario, svs: &SvsConfig, reps: usize) -> Result<ScenarioRun> {
    scenario.validate()?;
    svs.validate()?;
    let truth = scenario.ground_truth()?;
    let outcomes: Vec<(u64, Result<RepResult>)> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| (rep, run_replication(scenario, &truth, svs, rep)))
        .collect();
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (rep, out) in outcomes {
        match out {
            Ok(r) => results.push(r),
            Err(e) => {
                log::error!("replication {rep} failed: {e}");
                failures.push((rep, e.to_string()));
            }
        }
    }
    Ok(ScenarioRun {
        scenario: scenario.clone(),
        results,
        failures,
    })
}
