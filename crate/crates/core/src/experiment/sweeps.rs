use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::{Check, ExperimentConfig, ExperimentError, Sink};
use crate::fit::fit_decay;
use crate::kernel::{eval_htilde, sweep_kernel_sup, FitRow, KernelParams, ZSampling};
use crate::littlewood_paley::{
    bernstein_audit, commutator_audit, product_audit, AuditReport, AuditRow, BernsteinConfig, CommutatorConfig,
    ProductConfig,
};
use crate::par::Exec;
use crate::semigroup::{strichartz_datum, strichartz_sweep, MixedNormSpec, StrichartzConfig};
use crate::spectral::Grid;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSupRow {
    pub mu: f64,
    pub sup_abs: f64,
    /// `sup_abs · max(1, μ^{1/4}) · e^{r^α ν t/4}`.
    pub scaled: f64,
    pub z1_at_sup: f64,
    pub z2_at_sup: f64,
    pub origin_abs: f64,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HtildeRow {
    pub mu: f64,
    pub phi: f64,
    pub value: f64,
}

pub(crate) fn kernel(exp: &ExperimentConfig, sink: &mut Sink<'_>, exec: Exec) -> Result<(), ExperimentError> {
    let k = &exp.kernel;
    let base = KernelParams {
        t: k.t,
        r: k.r,
        big_r: k.big_r,
        alpha: exp.alpha,
        nu: exp.nu,
        ..KernelParams::default()
    };
    let z = ZSampling {
        radii: k.radii.clone(),
        directions: k.directions.clone(),
    };
    let sups = sweep_kernel_sup(&base, &k.mu_ladder, &z, k.tol, exec)?;
    let weight = (k.r.powf(exp.alpha) * exp.nu * k.t / 4.0).exp();
    let mut samples = Vec::new();
    let mut rows = Vec::new();
    for s in &sups {
        let origin = s
            .rows
            .iter()
            .find(|r| r.z1 == 0.0 && r.z2 == 0.0)
            .map_or(f64::NAN, |r| r.abs_k);
        rows.push(KernelSupRow {
            mu: s.mu,
            sup_abs: s.sup_abs,
            scaled: s.sup_abs * s.mu.powf(0.25).max(1.0) * weight,
            z1_at_sup: s.z_at_sup[0],
            z2_at_sup: s.z_at_sup[1],
            origin_abs: origin,
            failures: s.failures,
        });
        samples.extend(s.rows.iter().cloned());
    }
    sink.csv("kernel_samples.csv", &samples)?;
    sink.csv("kernel_sup.csv", &rows)?;

    let htilde_jobs: Vec<(f64, f64)> = [0.0, FRAC_PI_2]
        .iter()
        .flat_map(|&phi| k.htilde_mu.iter().map(move |&mu| (mu, phi)))
        .collect();
    let values = exec.map(&htilde_jobs, |&(mu, phi)| eval_htilde(mu, phi, k.r, k.big_r, k.htilde_tol));
    let mut hrows = Vec::new();
    for (&(mu, phi), v) in htilde_jobs.iter().zip(values) {
        hrows.push(HtildeRow { mu, phi, value: v? });
    }
    sink.csv("htilde.csv", &hrows)?;

    let origin_fit = fit_decay(&rows.iter().map(|r| (r.mu, r.origin_abs)).collect::<Vec<_>>())?;
    let sup_fit = fit_decay(&rows.iter().map(|r| (r.mu, r.sup_abs)).collect::<Vec<_>>())?;
    let series = |phi: f64| hrows.iter().filter(|r| r.phi == phi).map(|r| (r.mu, r.value)).collect::<Vec<_>>();
    let axis_fit = fit_decay(&series(0.0))?;
    let diag_fit = fit_decay(&series(FRAC_PI_2))?;
    let fits = vec![
        FitRow::new("kernel_origin", &origin_fit),
        FitRow::new("kernel_sup", &sup_fit),
        FitRow::new("htilde_phi0", &axis_fit),
        FitRow::new("htilde_phi_half_pi", &diag_fit),
    ];
    sink.csv("kernel_fits.csv", &fits)?;

    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0f64), |(lo, hi), r| (lo.min(r.scaled), hi.max(r.scaled)));
    let failures: usize = rows.iter().map(|r| r.failures).sum();
    let tol = &exp.tolerances;
    let o = sink.outcome();
    o.checks.push(Check::holds("kernel_converged", failures, "kernel samples without converged quadrature"));
    o.checks.push(Check::at_most("kernel_variation", hi / lo, tol.kernel_variation));
    o.checks.push(Check::at_most("kernel_origin_slope", origin_fit.slope, tol.kernel_origin_slope));
    o.checks.push(Check::within("htilde_axis_slope", axis_fit.slope, tol.htilde_axis));
    o.checks.push(Check::within("htilde_diagonal_slope", diag_fit.slope, tol.htilde_diagonal));
    o.notes.push(format!("sup_z |K| fitted slope {:.4}", sup_fit.slope));
    Ok(())
}

pub(crate) fn strichartz(exp: &ExperimentConfig, sink: &mut Sink<'_>, exec: Exec) -> Result<(), ExperimentError> {
    let s = &exp.strichartz;
    let g = Grid::new(s.n, s.box_length).map_err(|e| ExperimentError::Config(e.to_string()))?;
    let datum = strichartz_datum(&g, s.r, s.big_r, s.width)?;
    let ladder = exp.ladder();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &q in &s.q_values {
        let cfg = StrichartzConfig {
            spec: MixedNormSpec {
                p: s.p,
                q,
                horizon: s.horizon,
                interp: s.interp,
            },
            samples: s.samples,
            r: s.r,
            big_r: s.big_r,
            nu: exp.nu,
            alpha: exp.alpha,
        };
        let rep = strichartz_sweep(&datum, &ladder, &cfg, exec)?;
        rows.extend(rep.rows.iter().cloned());
        fits.push(FitRow::new(format!("p={},q={q}", s.p), &rep.fit));
        let o = sink.outcome();
        o.notes.extend(rep.warnings.iter().map(|w| format!("q={q}: {w}")));
        if q.is_infinite() {
            o.checks.push(Check::at_most("strichartz_variation", rep.variation, exp.tolerances.strichartz_variation));
        } else if q == 2.0 {
            o.checks
                .push(Check::at_most("strichartz_l2_slope", rep.fit.slope.abs(), exp.tolerances.strichartz_l2_slope));
        } else {
            o.notes.push(format!("q={q}: normalized variation {:.4}", rep.variation));
        }
    }
    sink.csv("strichartz.csv", &rows)?;
    sink.csv("strichartz_fits.csv", &fits)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditGridRow {
    pub audit: String,
    pub n: usize,
    pub constant_median: f64,
    pub constant_max: f64,
    pub stability: f64,
    pub exponent: Option<f64>,
    pub bounded: bool,
}

impl AuditGridRow {
    fn new(n: usize, r: &AuditReport) -> Self {
        Self {
            audit: r.name.clone(),
            n,
            constant_median: r.constant_median,
            constant_max: r.constant_max,
            stability: r.stability,
            exponent: r.exponent,
            bounded: r.bounded(),
        }
    }
}

/// λ-stability of each Bernstein series separately: the lower and upper
/// constants of the (2,2) rows and the upper constant of the (2,∞) rows.
fn bernstein_series_notes(rows: &[AuditRow]) -> Vec<String> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        let key = (r.audit.as_str(), r.params.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let spread = |v: Vec<f64>| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
        hi / lo
    };
    let mut out = Vec::new();
    for (audit, params) in keys {
        let series: Vec<&AuditRow> = rows.iter().filter(|r| r.audit == audit && r.params == params).collect();
        let upper = spread(series.iter().map(|r| r.ensemble_max).collect());
        let line = if audit.ends_with("q2") {
            let lower = spread(series.iter().map(|r| r.empirical_ratio).collect());
            format!("{audit} {params}: lambda stability lower {lower:.4}, upper {upper:.4}")
        } else {
            format!("{audit} {params}: lambda stability upper {upper:.4}")
        };
        out.push(line);
    }
    out
}

/// Worst ratio (either way round) of the median and max constants between
/// consecutive grids.
fn grid_factor(rows: &[AuditGridRow]) -> f64 {
    let ratio = |a: f64, b: f64| (a / b).max(b / a);
    rows.windows(2)
        .map(|w| ratio(w[0].constant_median, w[1].constant_median).max(ratio(w[0].constant_max, w[1].constant_max)))
        .fold(1.0, f64::max)
}

pub(crate) fn lp_audit(exp: &ExperimentConfig, sink: &mut Sink<'_>, exec: Exec) -> Result<(), ExperimentError> {
    let a = &exp.lp_audit;
    let mut summary = Vec::new();
    let (mut comm, mut prod) = (Vec::new(), Vec::new());
    let coarsest = a.grids.iter().copied().min().unwrap_or(0);
    let band = a
        .commutator_band
        .unwrap_or(2.0 * std::f64::consts::PI / a.box_length * (coarsest / 3) as f64);
    for &n in &a.grids {
        let c = commutator_audit(
            &CommutatorConfig {
                n,
                box_length: a.box_length,
                s: a.s,
                beta: a.beta,
                max_freq: band,
                ensemble_size: a.ensemble_size,
                seed: exp.seed,
                ..CommutatorConfig::default()
            },
            exec,
        )?;
        sink.csv(&format!("audit_commutator_n{n}.csv"), &c.rows)?;
        comm.push(AuditGridRow::new(n, &c));
        let p = product_audit(
            &ProductConfig {
                n,
                box_length: a.box_length,
                s: a.s,
                beta: a.beta,
                r_bands: a.r_bands.clone(),
                ensemble_size: a.ensemble_size,
                seed: exp.seed,
                ..ProductConfig::default()
            },
            exec,
        )?;
        sink.csv(&format!("audit_product_n{n}.csv"), &p.rows)?;
        prod.push(AuditGridRow::new(n, &p));
    }
    let b = bernstein_audit(
        &BernsteinConfig {
            n: a.bernstein_n,
            box_length: a.box_length,
            lambdas: a.lambdas.clone(),
            ensemble_size: a.ensemble_size,
            seed: exp.seed,
            ..BernsteinConfig::default()
        },
        exec,
    )?;
    sink.csv("audit_bernstein.csv", &b.rows)?;
    let (fc, fp) = (grid_factor(&comm), grid_factor(&prod));
    summary.extend(comm);
    summary.extend(prod);
    summary.push(AuditGridRow::new(a.bernstein_n, &b));
    sink.csv("audit_summary.csv", &summary)?;
    let tol = &exp.tolerances;
    let o = sink.outcome();
    o.checks.push(Check::at_most("commutator_grid_stability", fc, tol.audit_grid_factor));
    o.checks.push(Check::at_most("product_grid_stability", fp, tol.audit_grid_factor));
    o.checks.push(Check::at_most("bernstein_lambda_stability", b.stability, tol.bernstein_factor));
    o.notes.push(format!("commutator ensemble band {band}"));
    o.notes.extend(bernstein_series_notes(&b.rows));
    Ok(())
}
