//! `theory`: orthogonal-design Cp experiments.

use std::fmt::Write;

use cpbench_core::sim::Stream;
use cpbench_core::theory::{gap_identity_check, random_gap_instance, GapCheck, OverfitReport};
use cpbench_core::{b_k_count, cp_gap_closed_form, mc_overfit_experiment, OrthoInstance};

use crate::error::CliResult;
use crate::manifest::RepSeed;
use crate::outputs::{num, Outputs};
use crate::spec::RunSpec;

pub const GAP_TOLERANCE: f64 = 1e-9;

/// Instance 0 with the response at `V_k0` moved onto `V_{k0-1}`, so the
/// order statistics tie.
pub fn tie_instance(seed: u64, m: usize) -> CliResult<(OrthoInstance, usize)> {
    let (inst, k) = random_gap_instance(seed, 0, m)?;
    let k0 = inst.k0;
    let target = inst.abs_sorted[k0 - 1];
    let moved = inst.abs_sorted[k0];
    let mut y = inst.yvals.clone();
    if let Some(v) = y.iter_mut().find(|v| v.abs() == moved) {
        *v = v.signum() * target;
    }
    Ok((OrthoInstance::new(y, k0)?, k))
}

fn gap_row(label: String, c: &GapCheck) -> Vec<String> {
    let r = &c.report;
    vec![
        label,
        c.m.to_string(),
        r.k0.to_string(),
        r.k.to_string(),
        num(r.gap_exact),
        num(c.gap_direct),
        num(r.bound),
        num(r.delta_k),
        r.b_k.to_string(),
        r.tied.to_string(),
    ]
}

fn summary(report: &OverfitReport, checks: &[GapCheck], tie: &GapCheck, tie_bk: (usize, bool)) -> String {
    let p = &report.params;
    let reps = report.outcomes.len();
    let mut t = String::new();
    let _ = writeln!(
        t,
        "orthogonal design: n = {}, m = {}, k0 = {}, reps = {}",
        p.n, p.m, p.k0, reps
    );
    let mean_k: f64 = report.outcomes.iter().map(|o| o.k_hat as f64).sum::<f64>() / reps as f64;
    let _ = writeln!(t, "mean k_hat = {mean_k:.2}");
    let _ = writeln!(t, "P(k_hat > k0) = {:.4}", report.p_overfit);
    let _ = writeln!(t, "\nk_hat - k0 histogram:");
    for (e, c) in &report.excess_histogram {
        let _ = writeln!(t, "  {e:>6}: {c}");
    }

    let _ = writeln!(t, "\nB_k at k0 over replications (count of |Y| above V_k0):");
    for (b, c) in &report.b_k_histogram {
        let _ = writeln!(t, "  {b:>6}: {c}");
    }
    let q = p.k0 as f64 / p.m as f64;
    let _ = writeln!(
        t,
        "  Binomial(m, k0/m) would have mean {:.2} and variance {:.2}; observed variance {:.2}",
        p.m as f64 * q,
        p.m as f64 * q * (1.0 - q),
        variance(report.b_k_histogram.iter().map(|(b, c)| (*b as f64, *c)))
    );

    let max_err = checks.iter().map(|c| c.relative_error()).fold(0.0, f64::max);
    let bk_equal = checks
        .iter()
        .filter(|c| !c.report.tied && c.report.b_k == c.report.k0)
        .count();
    let untied = checks.iter().filter(|c| !c.report.tied).count();
    let _ = writeln!(t, "\ngap identity on {} random instances", checks.len());
    let _ = writeln!(t, "  max relative difference closed form vs direct: {max_err:.3e}");
    let _ = writeln!(t, "  bound gap <= -delta_k B_k + 2(k - k0) held on all instances");
    let _ = writeln!(t, "  B_k = k0 on {bk_equal} of {untied} untied instances");
    let _ = writeln!(
        t,
        "tie-injected instance: k0 = {}, k = {}, tied = {}, B_k = {} (tie flag {})",
        tie.report.k0, tie.report.k, tie.report.tied, tie_bk.0, tie_bk.1
    );
    t
}

fn variance(hist: impl Iterator<Item = (f64, usize)>) -> f64 {
    let pts: Vec<(f64, usize)> = hist.collect();
    let n: usize = pts.iter().map(|(_, c)| c).sum();
    if n < 2 {
        return 0.0;
    }
    let mean = pts.iter().map(|(v, c)| v * *c as f64).sum::<f64>() / n as f64;
    pts.iter().map(|(v, c)| (v - mean).powi(2) * *c as f64).sum::<f64>() / (n - 1) as f64
}

pub fn run(spec: &RunSpec, out: &mut Outputs) -> CliResult<Vec<RepSeed>> {
    let cfg = &spec.theory;
    let params = cfg.overfit_params()?;
    let report = mc_overfit_experiment(&params)?;
    let checks = gap_identity_check(cfg.seed, cfg.gap_instances, cfg.gap_m, GAP_TOLERANCE)?;
    let (tie_inst, tie_k) = tie_instance(cfg.seed, cfg.gap_m)?;
    let tie_report = cp_gap_closed_form(&tie_inst, tie_k, tie_inst.k0)?;
    let tie_direct = cpbench_core::theory::cp_gap_direct(&tie_inst, tie_k, tie_inst.k0)?;
    let tie_bk = b_k_count(&tie_inst, tie_inst.k0)?;
    let tie = GapCheck {
        instance: 0,
        m: cfg.gap_m,
        report: tie_report,
        gap_direct: tie_direct,
    };

    out.csv(
        "theory_replications.csv",
        &[
            "rep",
            "k_hat",
            "k0",
            "excess",
            "b_k",
            "b_k_tied",
            "gap_exact",
            "bound",
            "delta_k",
        ],
        |w| {
            for o in &report.outcomes {
                let (b, bt) = o
                    .b_k
                    .map(|b| (b.count.to_string(), b.tied.to_string()))
                    .unwrap_or_default();
                let (g, bd, dk) = o
                    .gap
                    .as_ref()
                    .map(|g| (num(g.gap_exact), num(g.bound), num(g.delta_k)))
                    .unwrap_or_default();
                w.write_record([
                    o.rep.to_string(),
                    o.k_hat.to_string(),
                    params.k0.to_string(),
                    (o.k_hat as i64 - params.k0 as i64).to_string(),
                    b,
                    bt,
                    g,
                    bd,
                    dk,
                ])?;
            }
            Ok(())
        },
    )?;
    out.csv(
        "theory_mean_curve.csv",
        &["k", "mean_cp", "sd_cp", "lower", "upper"],
        |w| {
            for c in &report.mean_curve {
                w.write_record([
                    c.k.to_string(),
                    num(c.mean_cp),
                    num(c.sd_cp),
                    num(c.mean_cp - c.sd_cp),
                    num(c.mean_cp + c.sd_cp),
                ])?;
            }
            Ok(())
        },
    )?;
    out.csv(
        "theory_gap_checks.csv",
        &[
            "instance",
            "m",
            "k0",
            "k",
            "gap_exact",
            "gap_direct",
            "bound",
            "delta_k",
            "b_k",
            "tied",
        ],
        |w| {
            for c in &checks {
                w.write_record(gap_row(c.instance.to_string(), c))?;
            }
            w.write_record(gap_row("tie".into(), &tie))?;
            Ok(())
        },
    )?;
    out.text(
        "theory_summary.txt",
        &summary(&report, &checks, &tie, (tie_bk.count, tie_bk.tied)),
    )?;

    Ok((0..params.reps as u64)
        .map(|rep| RepSeed {
            rho: None,
            rep,
            data_stream: Stream::Orthogonal(rep).id(),
            chain_seed: None,
        })
        .collect())
}
