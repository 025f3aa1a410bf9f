//! Exact linear propagator `e^{iAt ξ₁/|ξ| - νt|ξ|^α}`, trajectories, mixed
//! space-time norms and the Strichartz sweep in `A`.

mod strichartz;

use serde::Serialize;
use thiserror::Error;

use crate::fit::FitError;
use crate::par::Exec;
use crate::spectral::{SpectralError, SpectralField, Grid, Symbol};

pub use strichartz::{strichartz_datum, strichartz_sweep, StrichartzConfig, StrichartzReport, StrichartzRow};

#[derive(Debug, Error)]
pub enum SemigroupError {
    #[error("invalid semigroup configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// `G^A(t) g`, coefficient by coefficient.
pub fn propagate(g: &SpectralField, t: f64, amplitude: f64, nu: f64, alpha: f64) -> Result<SpectralField, SemigroupError> {
    Ok(g.apply(&Symbol::LinearPropagator { amplitude, nu, alpha, t })?)
}

/// Snapshots at strictly increasing times on one grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Grid,
    times: Vec<f64>,
    fields: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Self, SemigroupError> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(SemigroupError::Config(format!(
                "need as many fields as times (>= 1), got {} and {}",
                times.len(),
                fields.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || !times.iter().all(|t| t.is_finite()) {
            return Err(SemigroupError::Config("times must be finite and strictly increasing".into()));
        }
        let grid = fields[0].grid().clone();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(SemigroupError::Config("fields live on different grids".into()));
        }
        Ok(Self { grid, times, fields })
    }

    /// `G^A(t) g` at each time.
    pub fn propagated(
        g: &SpectralField,
        times: &[f64],
        amplitude: f64,
        nu: f64,
        alpha: f64,
        exec: Exec,
    ) -> Result<Self, SemigroupError> {
        if times.iter().any(|t| !(*t >= 0.0)) {
            return Err(SemigroupError::Config("times must be >= 0".into()));
        }
        let fields = exec.map(times, |&t| propagate(g, t, amplitude, nu, alpha));
        let fields = fields.into_iter().collect::<Result<Vec<_>, _>>()?;
        Self::new(times.to_vec(), fields)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixedNormSpec {
    /// Time exponent in `[1, ∞]`.
    pub p: f64,
    /// Space exponent in `[2, ∞]`.
    pub q: f64,
    pub horizon: f64,
    /// Zero-padding factor for spatial norms other than `q = 2`.
    pub interp: usize,
}

impl MixedNormSpec {
    pub fn new(p: f64, q: f64, horizon: f64) -> Result<Self, SemigroupError> {
        let s = Self { p, q, horizon, interp: 2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SemigroupError> {
        if !(self.p >= 1.0) {
            return Err(SemigroupError::Config(format!("p must lie in [1, inf], got {}", self.p)));
        }
        if !(self.q >= 2.0) {
            return Err(SemigroupError::Config(format!("q must lie in [2, inf], got {}", self.q)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SemigroupError::Config(format!("horizon must be finite and > 0, got {}", self.horizon)));
        }
        if self.interp == 0 || !self.interp.is_power_of_two() {
            return Err(SemigroupError::Config(format!("interp must be a power of two, got {}", self.interp)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedNorm {
    pub value: f64,
    /// Relative change against the every-other-sample estimate.
    pub coarse_change: f64,
    /// Set when the time sampling looks too coarse (change above 1%).
    pub warning: Option<String>,
}

/// Spatial `L^q` norm of one snapshot.
pub fn space_norm(f: &SpectralField, q: f64, interp: usize) -> Result<f64, SemigroupError> {
    if q == 2.0 {
        Ok(f.norm_l2())
    } else if interp == 1 {
        Ok(f.norm_lp(q))
    } else {
        Ok(f.norm_lp_fine(q, interp)?)
    }
}

fn time_norm(ts: &[f64], vals: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return vals.iter().cloned().fold(0.0, f64::max);
    }
    let integral: f64 = ts
        .windows(2)
        .zip(vals.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].powf(p) + v[1].powf(p)))
        .sum();
    integral.powf(1.0 / p)
}

/// `‖f‖_{L^p(0,T; L^q)}`: grid `L^q` per snapshot, trapezoid (or max) in time.
pub fn mixed_norm(traj: &Trajectory, spec: &MixedNormSpec, exec: Exec) -> Result<MixedNorm, SemigroupError> {
    spec.validate()?;
    let times = traj.times();
    if times[0] > 0.0 || *times.last().expect("nonempty") < spec.horizon {
        return Err(SemigroupError::Config(format!(
            "samples [{}, {}] do not cover [0, {}]",
            times[0],
            times.last().expect("nonempty"),
            spec.horizon
        )));
    }
    let used: Vec<usize> = (0..times.len()).filter(|&i| times[i] <= spec.horizon).collect();
    let norms = exec.map(&used, |&i| space_norm(&traj.fields()[i], spec.q, spec.interp));
    let norms = norms.into_iter().collect::<Result<Vec<_>, _>>()?;
    let ts: Vec<f64> = used.iter().map(|&i| times[i]).collect();
    let value = time_norm(&ts, &norms, spec.p);
    // every other sample, keeping the last one
    let keep: Vec<usize> = (0..ts.len()).filter(|i| i % 2 == 0 || *i == ts.len() - 1).collect();
    let coarse = time_norm(
        &keep.iter().map(|&i| ts[i]).collect::<Vec<_>>(),
        &keep.iter().map(|&i| norms[i]).collect::<Vec<_>>(),
        spec.p,
    );
    let coarse_change = if value > 0.0 { (value - coarse).abs() / value } else { 0.0 };
    let warning = (coarse_change >= 0.01)
        .then(|| format!("time sampling too coarse: halving it changes the norm by {:.2}%", 100.0 * coarse_change));
    Ok(MixedNorm { value, coarse_change, warning })
}

/// `count` sample times on `[0, T]`: half geometric from `T·1e-5`, half
/// uniform, merged.
pub fn sample_times(horizon: f64, count: usize) -> Vec<f64> {
    let ng = count / 2;
    let nl = (count - ng).max(2);
    let mut ts: Vec<f64> = (0..nl).map(|i| horizon * i as f64 / (nl - 1) as f64).collect();
    if ng >= 2 {
        let (lo, hi) = ((horizon * 1e-5).ln(), horizon.ln());
        ts.extend((0..ng).map(|i| (lo + (hi - lo) * i as f64 / (ng - 1) as f64).exp()));
    }
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * horizon);
    *ts.last_mut().expect("nonempty") = horizon;
    ts
}
