use serde::Serialize;

use super::data::{initial_datum, mixed_datum};
use super::{Check, ExperimentConfig, ExperimentError, Sink};
use crate::par::Exec;
use crate::semigroup::{mixed_norm, propagate, sample_times, MixedNormSpec, Trajectory};
use crate::solver::{
    energy_audit, relative_l2_difference, solve_full, solve_limit_1d, solve_perturbation_eta, EnergyReport,
    EquationForm, SolveOutput, SolverConfig,
};
use crate::spectral::{random_field, Grid, RandomFieldSpec, SpectralField};

fn uniform(horizon: f64, count: usize, with_zero: bool) -> Vec<f64> {
    let first = if with_zero { 0 } else { 1 };
    (first..=count).map(|k| horizon * k as f64 / count as f64).collect()
}

fn grid(n: usize, box_length: f64) -> Result<Grid, ExperimentError> {
    Grid::new(n, box_length).map_err(|e| ExperimentError::Config(e.to_string()))
}

fn solver_cfg(exp: &ExperimentConfig, g: &Grid, amplitude: f64, horizon: f64) -> SolverConfig {
    SolverConfig {
        n: g.n(),
        box_length: g.box_length(),
        nu: exp.nu,
        alpha: exp.alpha,
        amplitude,
        horizon,
        ..SolverConfig::default()
    }
}

fn with_dt(mut c: SolverConfig, theta0: &SpectralField, cfl: f64, phase: f64) -> Result<SolverConfig, ExperimentError> {
    c.dt = c.stable_dt(theta0, cfl, phase)?;
    Ok(c)
}

fn status<T>(r: &Result<T, ExperimentError>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("{}: {e}", e.class()),
    }
}

/// Adjacent pairs that fail to decrease strictly, counting unusable values.
fn non_decreasing(v: &[f64]) -> usize {
    v.windows(2).filter(|w| !(w[1] < w[0])).count() + v.iter().filter(|x| !x.is_finite()).count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergySummaryRow {
    pub seed: u64,
    pub member: u64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub dt: f64,
    pub steps: usize,
    pub max_cfl: f64,
    /// `max_t budget(t)/‖θ₀‖² - 1`.
    pub max_excess: f64,
    pub budget_drift: f64,
    pub l2_drift: f64,
    pub audit: String,
    pub status: String,
}

fn excess(rep: &EnergyReport) -> f64 {
    let e0 = rep.rows[0].l2_sq;
    rep.rows.iter().map(|r| r.budget / e0 - 1.0).fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn energy(exp: &ExperimentConfig, sink: &mut Sink<'_>, exec: Exec) -> Result<(), ExperimentError> {
    let e = &exp.energy;
    let g = grid(e.n, e.box_length)?;
    let spec = RandomFieldSpec {
        max_freq: e.max_freq,
        l2_norm: Some(e.l2_norm),
        ..RandomFieldSpec::default()
    };
    let ladder = exp.ladder();
    let jobs: Vec<(u64, f64)> = (0..e.members).flat_map(|m| ladder.iter().map(move |&a| (m, a))).collect();
    let times = uniform(e.horizon, e.samples, true);
    let results = exec.map(&jobs, |&(member, a)| -> Result<(SolverConfig, SolveOutput), ExperimentError> {
        let th = random_field(&g, &spec, exp.seed, member);
        let c = with_dt(solver_cfg(exp, &g, a, e.horizon), &th, e.cfl, e.phase)?;
        let out = solve_full(&th, &c, &times, exec)?;
        Ok((c, out))
    });
    let mut summary = Vec::new();
    let (mut worst, mut audit_failures) = (f64::NEG_INFINITY, 0);
    for ((member, a), res) in jobs.iter().zip(results) {
        let mut row = EnergySummaryRow {
            seed: exp.seed,
            member: *member,
            amplitude: *a,
            dt: f64::NAN,
            steps: 0,
            max_cfl: f64::NAN,
            max_excess: f64::NAN,
            budget_drift: f64::NAN,
            l2_drift: f64::NAN,
            audit: "not run".into(),
            status: status(&res),
        };
        match res {
            Ok((c, out)) => {
                let rep = energy_audit(&out, &c, e.sobolev)?;
                sink.csv(&format!("energy_m{member}_A{a}.csv"), &rep.rows)?;
                row.dt = c.dt;
                row.steps = out.steps;
                row.max_cfl = out.max_cfl;
                row.max_excess = excess(&rep);
                row.budget_drift = rep.budget_drift();
                row.l2_drift = rep.l2_drift();
                worst = worst.max(row.max_excess);
                row.audit = match rep.check(exp.tolerances.energy) {
                    Ok(()) => "pass".into(),
                    Err(err) => {
                        audit_failures += 1;
                        format!("fail: {err}")
                    }
                };
                for w in out.warnings {
                    sink.outcome().notes.push(format!("member {member}, A={a}: {w}"));
                }
            }
            Err(err) => {
                audit_failures += 1;
                sink.outcome().failures.push(format!("member {member}, A={a}: {err}"));
            }
        }
        summary.push(row);
    }
    sink.csv("energy_summary.csv", &summary)?;
    let o = sink.outcome();
    o.checks.push(Check::at_most("energy_inequality", worst, exp.tolerances.energy));
    o.checks.push(Check::holds("energy_budget_audit", audit_failures, "runs failing the budget audit"));

    // inviscid, non-dispersive run: L² is a conserved quantity of the truncated system
    let th = random_field(&g, &spec, exp.seed, 0);
    let c = SolverConfig {
        nu: 0.0,
        ..with_dt(solver_cfg(exp, &g, 0.0, e.conservation_horizon), &th, e.cfl, e.phase)?
    };
    let out = solve_full(&th, &c, &uniform(e.conservation_horizon, 10, true), exec)?;
    let rep = energy_audit(&out, &c, false)?;
    sink.csv("conservation.csv", &rep.rows)?;
    sink.outcome()
        .checks
        .push(Check::at_most("inviscid_conservation", rep.l2_drift(), exp.tolerances.conservation));
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergeRow {
    /// `mixed` for `θ̄₀ + θ̃₀`, `x1_independent` for `θ̃₀ = 0`.
    pub case: String,
    #[serde(rename = "A")]
    pub amplitude: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub sigma: f64,
    pub dt: f64,
    pub steps: usize,
    /// Relative change of `E` when every other time sample is dropped.
    pub coarse_change: f64,
    pub status: String,
}

pub(crate) fn converge(exp: &ExperimentConfig, sink: &mut Sink<'_>, exec: Exec) -> Result<(), ExperimentError> {
    let c = &exp.converge;
    let g = grid(c.n, c.box_length)?;
    let horizon = exp.horizon(c.horizon);
    let times = sample_times(horizon, c.samples);
    let spec = MixedNormSpec::new(2.0, exp.sigma, horizon)?;
    let (bar, tilde) = mixed_datum(&g, exp)?;
    let mut mixed = bar.to_field();
    mixed.add_scaled_assign(&tilde, 1.0);
    let mut cases = vec![("mixed", mixed)];
    if c.exact_case {
        cases.push(("x1_independent", bar.to_field()));
    }
    let ladder = exp.ladder();
    let jobs: Vec<(usize, f64)> = (0..cases.len()).flat_map(|k| ladder.iter().map(move |&a| (k, a))).collect();
    let results = exec.map(&jobs, |&(k, a)| -> Result<(f64, f64, usize, f64), ExperimentError> {
        let th = &cases[k].1;
        let s = with_dt(solver_cfg(exp, &g, a, horizon), th, c.cfl, c.phase)?;
        let out = solve_full(th, &s, &times, exec)?;
        let diffs = times
            .iter()
            .zip(out.trajectory.fields())
            .map(|(&t, f)| {
                let mut d = f.clone();
                d.add_scaled_assign(&solve_limit_1d(&bar, t, exp.nu, exp.alpha)?.to_field(), -1.0);
                Ok(d)
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        let m = mixed_norm(&Trajectory::new(times.clone(), diffs)?, &spec, exec)?;
        Ok((m.value * m.value, s.dt, out.steps, m.coarse_change))
    });
    let mut rows = Vec::new();
    for (&(k, a), res) in jobs.iter().zip(results) {
        let st = status(&res);
        let (e, dt, steps, coarse_change) = match res {
            Ok(v) => v,
            Err(err) => {
                sink.outcome().failures.push(format!("{} A={a}: {err}", cases[k].0));
                (f64::NAN, f64::NAN, 0, f64::NAN)
            }
        };
        rows.push(ConvergeRow {
            case: cases[k].0.into(),
            amplitude: a,
            e,
            sigma: exp.sigma,
            dt,
            steps,
            coarse_change,
            status: st,
        });
    }
    sink.csv("converge.csv", &rows)?;
    let tol = &exp.tolerances;
    let main: Vec<f64> = rows.iter().filter(|r| r.case == "mixed").map(|r| r.e).collect();
    let ratio = main.last().unwrap() / main[0];
    let o = sink.outcome();
    o.checks.push(Check::holds("converge_decreasing", non_decreasing(&main), "adjacent pairs not strictly decreasing"));
    o.checks.push(Check::at_most("converge_ratio", ratio, tol.converge_ratio));
    o.notes.push(format!("E(A_last)/E(A_first) = {ratio:.6}"));
    if c.exact_case {
        let worst = rows
            .iter()
            .filter(|r| r.case != "mixed")
            .map(|r| if r.e.is_finite() { r.e } else { f64::INFINITY })
            .fold(0.0, f64::max);
        o.checks.push(Check::at_most("converge_exact", worst, tol.converge_exact));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityRow {
    #[serde(rename = "A")]
    pub amplitude: f64,
    /// `sup_t ‖θ^A - G^A θ₀‖_{H^{2-α}}`.
    pub d_inf: f64,
    /// `(∫‖θ^A - G^A θ₀‖²_{Ḣ^{2-α/2}})^{1/2}`.
    pub d_2: f64,
    /// `sup_t ‖η‖_{H^{2-α}}` of the perturbation split.
    pub eta_sup: f64,
    pub eta_final_l2: f64,
    /// `max_t ‖(η + θ̃_m) - θ^A‖ / ‖θ^A‖`.
    pub reconstruction: f64,
    /// `min_t` relative difference of the `dt` and `dt/2` solves.
    pub halving_min: f64,
    /// `max_t` of the reconstruction error over the halving error.
    pub reconstruction_ratio: f64,
    pub dt: f64,
    pub steps: usize,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct StabilitySeries {
    #[serde(rename = "A")]
    amplitude: f64,
    t: f64,
    diff_h: f64,
    diff_hdot: f64,
    reconstruction: f64,
    halving: f64,
}

fn stability_point(
    exp: &ExperimentConfig,
    g: &Grid,
    theta0: &SpectralField,
    times: &[f64],
    a: f64,
    exec: Exec,
) -> Result<(StabilityRow, Vec<StabilitySeries>), ExperimentError> {
    let st = &exp.stability;
    let horizon = *times.last().unwrap();
    let s = SolverConfig {
        band: Some(st.band),
        ..with_dt(solver_cfg(exp, g, a, horizon), theta0, st.cfl, st.phase)?
    };
    let out = solve_full(theta0, &s, times, exec)?;
    let (hs, hd) = (2.0 - exp.alpha, 2.0 - 0.5 * exp.alpha);
    let mut series = Vec::new();
    for (&t, f) in times.iter().zip(out.trajectory.fields()) {
        let mut d = f.clone();
        d.add_scaled_assign(&propagate(theta0, t, a, exp.nu, exp.alpha)?, -1.0);
        series.push(StabilitySeries {
            amplitude: a,
            t,
            diff_h: d.sobolev_sq(hs, false).sqrt(),
            diff_hdot: d.sobolev_sq(hd, true).sqrt(),
            reconstruction: f64::NAN,
            halving: f64::NAN,
        });
    }
    let d_inf = series.iter().map(|r| r.diff_h).fold(0.0, f64::max);
    let mut d2 = 0.0;
    let (mut tp, mut vp) = (0.0, 0.0);
    for r in &series {
        let v = r.diff_hdot * r.diff_hdot;
        d2 += 0.5 * (r.t - tp) * (v + vp);
        (tp, vp) = (r.t, v);
    }
    let mut row = StabilityRow {
        amplitude: a,
        d_inf,
        d_2: d2.sqrt(),
        eta_sup: f64::NAN,
        eta_final_l2: f64::NAN,
        reconstruction: f64::NAN,
        halving_min: f64::NAN,
        reconstruction_ratio: f64::NAN,
        dt: s.dt,
        steps: out.steps,
        status: "ok".into(),
    };
    if st.reconstruction {
        let half = solve_full(theta0, &SolverConfig { dt: 0.5 * s.dt, ..s.clone() }, times, exec)?;
        let eta_cfg = SolverConfig {
            equation_form: EquationForm::EtaPerturbation,
            ..s.clone()
        };
        let (eta, lin) = solve_perturbation_eta(theta0, &eta_cfg, times, exec)?;
        let mut ratio = 0f64;
        for (i, r) in series.iter_mut().enumerate() {
            let full = &out.trajectory.fields()[i];
            let mut sum = eta.trajectory.fields()[i].clone();
            sum.add_scaled_assign(&lin.fields()[i], 1.0);
            r.reconstruction = relative_l2_difference(&sum, full);
            r.halving = relative_l2_difference(full, &half.trajectory.fields()[i]);
            let q = if r.reconstruction == 0.0 { 0.0 } else { r.reconstruction / r.halving };
            ratio = ratio.max(q);
        }
        row.eta_sup = eta
            .trajectory
            .fields()
            .iter()
            .map(|f| f.sobolev_sq(hs, false).sqrt())
            .fold(0.0, f64::max);
        row.eta_final_l2 = eta.trajectory.fields().last().unwrap().norm_l2();
        row.reconstruction = series.iter().map(|r| r.reconstruction).fold(0.0, f64::max);
        row.halving_min = series.iter().map(|r| r.halving).fold(f64::INFINITY, f64::min);
        row.reconstruction_ratio = ratio;
    }
    Ok((row, series))
}

pub(crate) fn stability(exp: &ExperimentConfig, sink: &mut Sink<'_>, exec: Exec) -> Result<(), ExperimentError> {
    let st = &exp.stability;
    let g = grid(st.n, st.box_length)?;
    let horizon = exp.horizon(st.horizon);
    let times = uniform(horizon, st.samples, false);
    let theta0 = initial_datum(&g, exp)?;
    let ladder = exp.ladder();
    let results = exec.map(&ladder, |&a| stability_point(exp, &g, &theta0, &times, a, exec));
    let (mut rows, mut series) = (Vec::new(), Vec::new());
    for (&a, res) in ladder.iter().zip(results) {
        match res {
            Ok((row, s)) => {
                rows.push(row);
                series.extend(s);
            }
            Err(err) => {
                rows.push(StabilityRow {
                    amplitude: a,
                    d_inf: f64::NAN,
                    d_2: f64::NAN,
                    eta_sup: f64::NAN,
                    eta_final_l2: f64::NAN,
                    reconstruction: f64::NAN,
                    halving_min: f64::NAN,
                    reconstruction_ratio: f64::NAN,
                    dt: f64::NAN,
                    steps: 0,
                    status: format!("{}: {err}", err.class()),
                });
                sink.outcome().failures.push(format!("A={a}: {err}"));
            }
        }
    }
    sink.csv("stability.csv", &rows)?;
    sink.csv("stability_series.csv", &series)?;
    let d: Vec<f64> = rows.iter().map(|r| r.d_inf).collect();
    let o = sink.outcome();
    o.checks.push(Check::holds("stability_decreasing", non_decreasing(&d), "adjacent pairs not strictly decreasing"));
    o.notes.push(format!("D_inf(A_last)/D_inf(A_first) = {:.6e}", d.last().unwrap() / d[0]));
    if st.reconstruction {
        let worst = rows
            .iter()
            .map(|r| if r.reconstruction_ratio.is_finite() { r.reconstruction_ratio } else { f64::INFINITY })
            .fold(0.0, f64::max);
        o.checks.push(Check::at_most("stability_reconstruction", worst, exp.tolerances.reconstruction_factor));
    }
    Ok(())
}
