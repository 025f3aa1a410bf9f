//! Integrating-factor RK4 for the dispersive dissipative QG equation, the
//! difference equation around an `x₁`-independent profile, the perturbation
//! equation around the linear band-limited flow, and the exact 1D limit.
//!
//! The linear symbol `-ν|ξ|^α + iAξ₁/|ξ|` is integrated exactly; RK4 steps
//! only the dealiased transport term. Steps subdivide each interval between
//! sample times so that every snapshot is taken at its exact time.

mod energy;
mod io;
mod limit;
mod stepper;

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::Exec;
use crate::semigroup::{propagate, SemigroupError, Trajectory};
use crate::spectral::{Grid, SpectralError, SpectralField, Symbol};
use stepper::{check_samples, is_finite, Dissipation, Integrator, Ops};

pub use energy::{energy_audit, EnergyReport, EnergyRow, TOL_ENERGY};
pub use io::{read_trajectory, write_trajectory, TrajectoryHeader};
pub use limit::{solve_limit_1d, Profile1D};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("non-finite state after t = {time}")]
    BlowUp { time: f64 },
    #[error("energy budget {budget} exceeds bound {bound} at t = {time}")]
    Audit { time: f64, budget: f64, bound: f64 },
    #[error("malformed trajectory file: {0}")]
    Format(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationForm {
    Full,
    ThetaPerturbation,
    EtaPerturbation,
}

impl EquationForm {
    pub(crate) fn code(self) -> u64 {
        match self {
            Self::Full => 0,
            Self::ThetaPerturbation => 1,
            Self::EtaPerturbation => 2,
        }
    }

    pub(crate) fn from_code(c: u64) -> Option<Self> {
        [Self::Full, Self::ThetaPerturbation, Self::EtaPerturbation].into_iter().find(|f| f.code() == c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub n: usize,
    pub box_length: f64,
    pub nu: f64,
    pub alpha: f64,
    /// Dispersion amplitude `A`.
    pub amplitude: f64,
    pub dt: f64,
    pub horizon: f64,
    pub dealias: bool,
    pub equation_form: EquationForm,
    /// `(r, R)` of `I_{r,R}`, required for the η form.
    pub band: Option<[f64; 2]>,
    /// Transport term on; off leaves the exact linear flow.
    pub nonlinear: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n: 128,
            box_length: 16.0 * PI,
            nu: 1.0,
            alpha: 0.5,
            amplitude: 0.0,
            dt: 0.01,
            horizon: 2.0,
            dealias: true,
            equation_form: EquationForm::Full,
            band: None,
            nonlinear: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::Config(m));
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be >= 0, got {}", self.nu));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return bad(format!("amplitude must be >= 0, got {}", self.amplitude));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return bad(format!("horizon {} must be >= dt {}", self.horizon, self.dt));
        }
        match (self.equation_form, self.band) {
            (EquationForm::EtaPerturbation, None) => return bad("the eta form needs a band (r, R)".into()),
            (_, Some([r, big_r])) if !(r > 0.0 && big_r > r && big_r.is_finite()) => {
                return bad(format!("band needs 0 < r < R, got ({r}, {big_r})"))
            }
            _ => {}
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<Grid, SolverError> {
        Ok(Grid::new(self.n, self.box_length)?)
    }

    /// Largest step with `dt·max|u|·max|ξ| <= cfl` at `θ₀` and `A·dt <= phase`,
    /// capped at the horizon.
    pub fn stable_dt(&self, theta0: &SpectralField, cfl: f64, phase: f64) -> Result<f64, SolverError> {
        let grid = self.grid()?;
        check_grid(theta0, &grid)?;
        let ops = Ops::new(&grid, self.dealias, Exec::Serial);
        let (_, umax) = ops.advection(theta0.coeffs(), None);
        let mut dt = self.horizon;
        if umax > 0.0 {
            dt = dt.min(cfl / (umax * grid.max_frequency()));
        }
        if self.amplitude > 0.0 {
            dt = dt.min(phase / self.amplitude);
        }
        Ok(dt)
    }
}

/// Snapshots plus the step-level diagnostics of one solve.
#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub trajectory: Trajectory,
    /// `2ν∫₀^t‖|D|^{α/2}θ‖²` of the integrated variable at each sample time.
    pub dissipation: Vec<f64>,
    pub steps: usize,
    /// Largest `h·max|u|·max|ξ|` seen.
    pub max_cfl: f64,
    pub warnings: Vec<String>,
}

type Rhs<'a> = dyn FnMut(f64, &Array2<Complex64>) -> (Array2<Complex64>, f64) + 'a;

/// Stability threshold of the monitored CFL number.
pub const CFL_LIMIT: f64 = 0.5;

fn check_grid(f: &SpectralField, grid: &Grid) -> Result<(), SolverError> {
    if f.grid() != grid {
        return Err(SolverError::Config(format!("field grid {:?} differs from configured {:?}", f.grid(), grid)));
    }
    Ok(())
}

fn check_real(f: &SpectralField) -> Result<(), SolverError> {
    if f.symmetry_defect() > 1e-12 * f.max_abs_coeff().max(f64::MIN_POSITIVE) || !f.is_finite() {
        return Err(SolverError::Config("initial datum is not a finite real field".into()));
    }
    Ok(())
}

fn integrate(
    cfg: &SolverConfig,
    grid: &Grid,
    start: Array2<Complex64>,
    samples: &[f64],
    rhs: &mut Rhs<'_>,
) -> Result<SolveOutput, SolverError> {
    check_samples(samples, cfg.horizon)?;
    let mut integ = Integrator::new(grid, cfg.amplitude, cfg.nu, cfg.alpha);
    let diss = Dissipation::new(grid, cfg.nu, cfg.alpha);
    let kmax = grid.max_frequency();
    let mut t = 0.0;
    let mut state = start;
    let (mut k, mut umax) = rhs(0.0, &state);
    let mut acc = 0.0;
    let mut dissipation = Vec::with_capacity(samples.len());
    let (mut steps, mut max_cfl, mut warnings) = (0, 0f64, Vec::new());
    let mut fields = Vec::with_capacity(samples.len());
    for &ts in samples {
        let span = ts - t;
        if span > 0.0 {
            let m = ((span / cfg.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = span / m as f64;
            for j in 0..m {
                let tj = t + j as f64 * h;
                let cfl = h * umax * kmax;
                if cfl > CFL_LIMIT && max_cfl <= CFL_LIMIT {
                    warnings.push(format!("CFL number {cfl:.3} exceeds {CFL_LIMIT} at t = {tj}"));
                }
                max_cfl = max_cfl.max(cfl);
                let next = integ.step(tj, h, &state, &k, rhs);
                if !is_finite(&next.state) || !is_finite(&next.rhs) {
                    return Err(SolverError::BlowUp { time: tj });
                }
                acc += diss.step(h, (&state, &k), (&next.state, &next.rhs));
                state = next.state;
                k = next.rhs;
                umax = next.umax;
                steps += 1;
            }
            t = ts;
        }
        fields.push(SpectralField::from_coeffs(grid, state.clone())?);
        dissipation.push(acc);
    }
    Ok(SolveOutput {
        trajectory: Trajectory::new(samples.to_vec(), fields)?,
        dissipation,
        steps,
        max_cfl,
        warnings,
    })
}

fn zero_rhs(a: &Array2<Complex64>) -> (Array2<Complex64>, f64) {
    (Array2::zeros(a.dim()), 0.0)
}

/// Memo of the last few time-dependent inputs, keyed on exact stage times.
struct StageCache<T> {
    slots: Vec<(u64, T)>,
}

impl<T> StageCache<T> {
    fn new() -> Self {
        Self { slots: Vec::new() }
    }

    fn get(&mut self, t: f64, make: impl FnOnce() -> T) -> &T {
        let key = t.to_bits();
        if let Some(i) = self.slots.iter().position(|(k, _)| *k == key) {
            return &self.slots[i].1;
        }
        if self.slots.len() == 3 {
            self.slots.remove(0);
        }
        self.slots.push((key, make()));
        &self.slots.last().unwrap().1
    }
}

/// Full equation from `θ₀`.
pub fn solve_full(theta0: &SpectralField, cfg: &SolverConfig, samples: &[f64], exec: Exec) -> Result<SolveOutput, SolverError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    check_grid(theta0, &grid)?;
    check_real(theta0)?;
    let ops = Ops::new(&grid, cfg.dealias, exec);
    let mut rhs = |_: f64, a: &Array2<Complex64>| if cfg.nonlinear { ops.advection(a, None) } else { zero_rhs(a) };
    integrate(cfg, &grid, theta0.coeffs().clone(), samples, &mut rhs)
}

/// Difference `Θ = θ - θ̄` for `θ₀ = θ̄₀(x₂) + Θ₀`, with `θ̄` taken from the
/// exact limit solution at every stage time.
pub fn solve_perturbation_theta(
    tilde0: &SpectralField,
    bar0: &Profile1D,
    cfg: &SolverConfig,
    samples: &[f64],
    exec: Exec,
) -> Result<SolveOutput, SolverError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    check_grid(tilde0, &grid)?;
    check_real(tilde0)?;
    if *bar0.grid() != grid {
        return Err(SolverError::Config("profile grid differs from configured grid".into()));
    }
    let ops = Ops::new(&grid, cfg.dealias, exec);
    let mut cache = StageCache::new();
    let mut rhs = |t: f64, a: &Array2<Complex64>| {
        if !cfg.nonlinear {
            return zero_rhs(a);
        }
        let bg = cache.get(t, || {
            let bar = solve_limit_1d(bar0, t, cfg.nu, cfg.alpha).expect("validated limit parameters");
            ops.background(bar.to_field().coeffs())
        });
        ops.advection(a, Some(bg))
    };
    integrate(cfg, &grid, tilde0.coeffs().clone(), samples, &mut rhs)
}

/// `θ = η + θ̃_m` with `θ̃_m = G^A(t) I_{r,R} θ₀` exact and `η₀ = (Id - I_{r,R})θ₀`.
/// Returns the η solve and the `θ̃_m` snapshots.
pub fn solve_perturbation_eta(
    theta0: &SpectralField,
    cfg: &SolverConfig,
    samples: &[f64],
    exec: Exec,
) -> Result<(SolveOutput, Trajectory), SolverError> {
    cfg.validate()?;
    let [r, big_r] = cfg
        .band
        .ok_or_else(|| SolverError::Config("the eta form needs a band (r, R)".into()))?;
    let grid = cfg.grid()?;
    check_grid(theta0, &grid)?;
    check_real(theta0)?;
    let filtered = theta0.apply(&Symbol::BandCutoff { r, big_r })?;
    let mut eta0 = theta0.clone();
    eta0.add_scaled_assign(&filtered, -1.0);
    let ops = Ops::new(&grid, cfg.dealias, exec);
    let lin = |t: f64| propagate(&filtered, t, cfg.amplitude, cfg.nu, cfg.alpha).expect("validated propagator");
    let mut cache = StageCache::new();
    let mut rhs = |t: f64, a: &Array2<Complex64>| {
        if !cfg.nonlinear {
            return zero_rhs(a);
        }
        let m = cache.get(t, || lin(t));
        ops.advection(&(a + m.coeffs()), None)
    };
    let out = integrate(cfg, &grid, eta0.into_coeffs(), samples, &mut rhs)?;
    let lin_traj = Trajectory::new(samples.to_vec(), samples.iter().map(|&t| lin(t)).collect())?;
    Ok((out, lin_traj))
}

/// `‖a - b‖ / ‖b‖`, or `‖a - b‖` when `b = 0`.
pub fn relative_l2_difference(a: &SpectralField, b: &SpectralField) -> f64 {
    let mut d = a.clone();
    d.add_scaled_assign(b, -1.0);
    let nb = b.norm_l2();
    if nb > 0.0 {
        d.norm_l2() / nb
    } else {
        d.norm_l2()
    }
}

/// Time-step refinement study of the full equation at `dt`, `dt/2`, `dt/4`.
#[derive(Clone, Debug)]
pub struct DtHalving {
    pub dt: f64,
    pub times: Vec<f64>,
    /// Relative difference between the `dt` and `dt/2` runs at each time.
    pub coarse_error: Vec<f64>,
    /// Relative difference between the `dt/2` and `dt/4` runs.
    pub fine_error: Vec<f64>,
    /// `coarse_error / fine_error` at the last time; 16 for a fourth-order scheme.
    pub ratio: f64,
    pub runs: [SolveOutput; 3],
}

pub fn dt_halving(theta0: &SpectralField, cfg: &SolverConfig, samples: &[f64], exec: Exec) -> Result<DtHalving, SolverError> {
    let cfgs: Vec<SolverConfig> = [1.0, 0.5, 0.25]
        .iter()
        .map(|s| SolverConfig {
            dt: cfg.dt * s,
            ..cfg.clone()
        })
        .collect();
    let runs = exec.map(&cfgs, |c| solve_full(theta0, c, samples, exec));
    let mut runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let diff = |a: &SolveOutput, b: &SolveOutput| -> Vec<f64> {
        a.trajectory
            .fields()
            .iter()
            .zip(b.trajectory.fields())
            .map(|(x, y)| relative_l2_difference(x, y))
            .collect()
    };
    let coarse_error = diff(&runs[0], &runs[1]);
    let fine_error = diff(&runs[1], &runs[2]);
    let ratio = coarse_error.last().unwrap() / fine_error.last().unwrap();
    let r2 = runs.pop().unwrap();
    let r1 = runs.pop().unwrap();
    let r0 = runs.pop().unwrap();
    Ok(DtHalving {
        dt: cfg.dt,
        times: samples.to_vec(),
        coarse_error,
        fine_error,
        ratio,
        runs: [r0, r1, r2],
    })
}

#[cfg(test)]
mod tests;
