use std::io::Write;

use serde::Serialize;

use super::{EquationForm, SolveOutput, SolverConfig, SolverError};
use crate::semigroup::Trajectory;

/// Relative slack of the energy inequality and of budget monotonicity.
pub const TOL_ENERGY: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    pub l2_sq: f64,
    pub diss_integral: f64,
    pub budget: f64,
    pub sobolev_2ma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
}

fn rows(traj: &Trajectory, diss: &[f64], alpha: f64, sobolev: bool) -> Vec<EnergyRow> {
    traj.times()
        .iter()
        .zip(traj.fields())
        .zip(diss)
        .map(|((&t, f), &d)| {
            let l2 = f.norm_l2_sq();
            EnergyRow {
                t,
                l2_sq: l2,
                diss_integral: d,
                budget: l2 + d,
                sobolev_2ma: sobolev.then(|| f.sobolev_sq(2.0 - alpha, false)),
            }
        })
        .collect()
}

/// Energy budget of a full-equation solve, using the dissipation accumulated
/// step by step inside the solver.
pub fn energy_audit(out: &SolveOutput, cfg: &SolverConfig, sobolev: bool) -> Result<EnergyReport, SolverError> {
    if cfg.equation_form != EquationForm::Full {
        return Err(SolverError::Config("energy audit needs a full-equation trajectory".into()));
    }
    if out.trajectory.times()[0] != 0.0 {
        return Err(SolverError::Config("energy audit needs a snapshot at t = 0".into()));
    }
    Ok(EnergyReport {
        rows: rows(&out.trajectory, &out.dissipation, cfg.alpha, sobolev),
    })
}

impl EnergyReport {
    /// Budget from snapshots alone, dissipation by the trapezoid rule.
    pub fn from_snapshots(traj: &Trajectory, nu: f64, alpha: f64, sobolev: bool) -> Self {
        let rate: Vec<f64> = traj.fields().iter().map(|f| 2.0 * nu * f.sobolev_sq(alpha / 2.0, true)).collect();
        let mut diss = vec![0.0; rate.len()];
        let t = traj.times();
        for i in 1..rate.len() {
            diss[i] = diss[i - 1] + 0.5 * (t[i] - t[i - 1]) * (rate[i] + rate[i - 1]);
        }
        Self {
            rows: rows(traj, &diss, alpha, sobolev),
        }
    }

    /// `budget(t) <= ‖θ₀‖²(1 + tol)` and `budget` non-increasing up to
    /// `tol·‖θ₀‖²`. The first offending time is reported.
    pub fn check(&self, tol: f64) -> Result<(), SolverError> {
        let Some(first) = self.rows.first() else {
            return Ok(());
        };
        let e0 = first.l2_sq;
        let mut prev = first.budget;
        for r in &self.rows {
            let bound = (e0 * (1.0 + tol)).min(prev + tol * e0);
            if !(r.budget <= bound) {
                return Err(SolverError::Audit {
                    time: r.t,
                    budget: r.budget,
                    bound,
                });
            }
            prev = prev.max(r.budget);
        }
        Ok(())
    }

    /// `max_t |l2_sq(t) - l2_sq(0)| / l2_sq(0)`.
    pub fn l2_drift(&self) -> f64 {
        Self::drift(self.rows.iter().map(|r| r.l2_sq))
    }

    /// `max_t |budget(t) - budget(0)| / budget(0)`.
    pub fn budget_drift(&self) -> f64 {
        Self::drift(self.rows.iter().map(|r| r.budget))
    }

    fn drift(mut v: impl Iterator<Item = f64>) -> f64 {
        let Some(v0) = v.next() else { return 0.0 };
        let worst = v.fold(0f64, |m, x| m.max((x - v0).abs()));
        if v0 > 0.0 {
            worst / v0
        } else {
            worst
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        crate::kernel::write_csv(&self.rows, w)
    }
}
