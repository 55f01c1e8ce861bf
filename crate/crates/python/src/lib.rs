//! Python bindings: simulate the benchmark design, fit LARS, forward stepwise
//! and SVS with Cp selection, and run the orthogonal-design checks.

use cpbench_core::bench::fit_all;
use cpbench_core::config::TheoryConfig;
use cpbench_core::model::column_major;
use cpbench_core::{
    confusion_counts, cp_gap_closed_form, mc_overfit_experiment, simulate_dataset, standardize, CpCurve, Dataset,
    Error, PathFit, Selection, SimScenario, SvsConfig,
};
use ndarray::Array1;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Invariant(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn dataset(x: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<Dataset> {
    let n = x.len();
    let m = x.first().map_or(0, Vec::len);
    if x.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows of x differ in length"));
    }
    let cols: Vec<Vec<f64>> = (0..m).map(|j| x.iter().map(|r| r[j]).collect()).collect();
    Dataset::new(column_major(n, &cols), Array1::from(y)).map_err(py_err)
}

fn method<'py>(py: Python<'py>, curve: &CpCurve, sel: &Selection, path: &PathFit) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("k", sel.k)?;
    d.set_item("cp_min", sel.cp)?;
    d.set_item("selected", sel.active.clone())?;
    d.set_item("entry_order", path.last().active.clone())?;
    d.set_item("cp", curve.entries.iter().map(|e| e.cp).collect::<Vec<_>>())?;
    d.set_item("rss", curve.entries.iter().map(|e| e.rss).collect::<Vec<_>>())?;
    Ok(d)
}

/// One replication of the clustered design: `x` as rows, `y`, the true
/// coefficients and their support.
#[pyfunction]
#[pyo3(signature = (rho=0.0, rep=0, seed=20040401, n=800, m=400))]
fn simulate(py: Python<'_>, rho: f64, rep: u64, seed: u64, n: usize, m: usize) -> PyResult<Bound<'_, PyDict>> {
    let s = SimScenario {
        n,
        m,
        rho,
        seed,
        ..SimScenario::default()
    };
    s.validate().map_err(py_err)?;
    let data = simulate_dataset(&s, rep).map_err(py_err)?;
    let d = PyDict::new(py);
    let rows: Vec<Vec<f64>> = data.x.rows().into_iter().map(|r| r.to_vec()).collect();
    d.set_item("x", rows)?;
    d.set_item("y", data.y.to_vec())?;
    d.set_item("beta", data.beta_true.as_ref().map(|b| b.to_vec()))?;
    d.set_item("support", data.true_support())?;
    Ok(d)
}

/// Standardize, then fit all three paths and pick each minimum-Cp model.
#[pyfunction]
#[pyo3(signature = (x, y, iterations=5000, burn_in=1000, seed=1, v0=1e-4, v1=0.02))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    iterations: usize,
    burn_in: usize,
    seed: u64,
    v0: f64,
    v1: f64,
) -> PyResult<Bound<'_, PyDict>> {
    let data = dataset(x, y)?;
    let s = standardize(&data).map_err(py_err)?;
    let cfg = SvsConfig {
        iterations,
        burn_in,
        seed,
        spike_variance: v0,
        slab_variance: v1,
        ..SvsConfig::default()
    };
    let f = py.detach(|| fit_all(&s, &cfg, None)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("sigma2", f.sigma2)?;
    d.set_item("lars", method(py, &f.lars_curve, &f.lars_selection, &f.lars)?)?;
    d.set_item("step", method(py, &f.step_curve, &f.step_selection, &f.step)?)?;
    d.set_item("svs", method(py, &f.svs_curve, &f.svs_selection, &f.svs_path)?)?;
    d.set_item("post_mean", f.posterior.post_mean_beta.to_vec())?;
    d.set_item("inclusion", f.posterior.inclusion_freq.to_vec())?;
    d.set_item("ranking", f.ranking)?;
    Ok(d)
}

/// TP/FP/TN/FN and the derived rates for a selected set.
#[pyfunction]
fn confusion(py: Python<'_>, selected: Vec<usize>, support: Vec<usize>, m: usize) -> PyResult<Bound<'_, PyDict>> {
    let c = confusion_counts(&selected, &support, m).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("tp", c.tp)?;
    d.set_item("fp", c.fp)?;
    d.set_item("tn", c.tn)?;
    d.set_item("fn", c.fn_)?;
    d.set_item("total_miss", c.total_miss())?;
    d.set_item("fdr", c.fdr())?;
    d.set_item("fnr", c.fnr())?;
    Ok(d)
}

/// Closed-form `Cp(k) - Cp(k0)` for orthogonal responses `yvals`.
#[pyfunction]
fn cp_gap(py: Python<'_>, yvals: Vec<f64>, k0: usize, k: usize) -> PyResult<Bound<'_, PyDict>> {
    let inst = cpbench_core::OrthoInstance::new(yvals, k0).map_err(py_err)?;
    let r = cp_gap_closed_form(&inst, k, k0).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("gap", r.gap_exact)?;
    d.set_item("bound", r.bound)?;
    d.set_item("delta_k", r.delta_k)?;
    d.set_item("b_k", r.b_k)?;
    d.set_item("tied", r.tied)?;
    Ok(d)
}

/// Monte Carlo over orthogonal designs with the calibrated signal.
#[pyfunction]
#[pyo3(signature = (reps=100, seed=20040401))]
fn overfit(py: Python<'_>, reps: usize, seed: u64) -> PyResult<Bound<'_, PyDict>> {
    let cfg = TheoryConfig {
        reps,
        seed,
        ..TheoryConfig::default()
    };
    let p = cfg.overfit_params().map_err(py_err)?;
    let r = py.detach(|| mc_overfit_experiment(&p)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("k0", p.k0)?;
    d.set_item("p_overfit", r.p_overfit)?;
    d.set_item("k_hat", r.outcomes.iter().map(|o| o.k_hat).collect::<Vec<_>>())?;
    Ok(d)
}

#[pymodule]
fn cpbench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(confusion, m)?)?;
    m.add_function(wrap_pyfunction!(cp_gap, m)?)?;
    m.add_function(wrap_pyfunction!(overfit, m)?)?;
    Ok(())
}
