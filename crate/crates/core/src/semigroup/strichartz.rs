use serde::Serialize;

use super::{mixed_norm, sample_times, MixedNormSpec, SemigroupError, Trajectory};
use crate::fit::{fit_decay, DecayFit};
use crate::par::Exec;
use crate::spectral::{gaussian_bump, Grid, SpectralField, Symbol};

#[derive(Clone, Debug, PartialEq)]
pub struct StrichartzConfig {
    pub spec: MixedNormSpec,
    /// Time samples per trajectory.
    pub samples: usize,
    /// Band `B_{r,R} = {|ξ₁| >= r, |ξ| <= R}` that must contain `supp ĝ`.
    pub r: f64,
    pub big_r: f64,
    pub nu: f64,
    pub alpha: f64,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        Self {
            spec: MixedNormSpec {
                p: 2.0,
                q: f64::INFINITY,
                horizon: 4.0,
                interp: 2,
            },
            samples: 512,
            r: 1.0,
            big_r: 4.0,
            nu: 1.0,
            alpha: 0.5,
        }
    }
}

impl StrichartzConfig {
    /// Exponent `(1/8p)(1 - 2/q)` of the upper bound `A^{-(1/8p)(1-2/q)}`.
    pub fn bound_exponent(&self) -> f64 {
        let inv_q = if self.spec.q.is_infinite() { 0.0 } else { 1.0 / self.spec.q };
        let inv_p = if self.spec.p.is_infinite() { 0.0 } else { 1.0 / self.spec.p };
        inv_p / 8.0 * (1.0 - 2.0 * inv_q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrichartzRow {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub mixed_norm: f64,
    /// `mixed_norm · A^{(1/8p)(1-2/q)}`.
    pub normalized_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrichartzReport {
    pub rows: Vec<StrichartzRow>,
    pub fit: DecayFit,
    /// `max / min` of the normalized values.
    pub variation: f64,
    pub warnings: Vec<String>,
}

/// A Gaussian bump centred in the box, restricted to `B_{r, 2R'}` by
/// `χ(|D|/R')(1 - χ(|D₁|/r))` with `R' = R/2`, so `supp ĝ ⊂ B_{r,R}`.
pub fn strichartz_datum(grid: &Grid, r: f64, big_r: f64, width: f64) -> Result<SpectralField, SemigroupError> {
    let l = grid.box_length();
    let bump = gaussian_bump(grid, (0.5 * l, 0.5 * l), width, 1.0);
    Ok(bump.apply(&Symbol::BandCutoff { r, big_r: 0.5 * big_r })?)
}

fn check_support(g: &SpectralField, r: f64, big_r: f64) -> Result<(), SemigroupError> {
    let grid = g.grid();
    let n = grid.n();
    for i1 in 0..n {
        for i2 in 0..n {
            let w = grid.wavevector(i1, i2);
            let inside = w.xi1.abs() >= r && w.norm <= big_r;
            if !inside && g.coeffs()[[i1, i2]].norm() != 0.0 {
                return Err(SemigroupError::Config(format!(
                    "datum has content at xi = ({}, {}) outside B_{{{r},{big_r}}}",
                    w.xi1, w.xi2
                )));
            }
        }
    }
    Ok(())
}

/// Mixed norm of `G^A(·) g` for each `A` of the ladder and the fitted decay in `A`.
pub fn strichartz_sweep(
    g: &SpectralField,
    a_ladder: &[f64],
    cfg: &StrichartzConfig,
    exec: Exec,
) -> Result<StrichartzReport, SemigroupError> {
    cfg.spec.validate()?;
    if !(cfg.r > 0.0 && cfg.r < cfg.big_r) {
        return Err(SemigroupError::Config(format!("need 0 < r < R, got r={}, R={}", cfg.r, cfg.big_r)));
    }
    if a_ladder.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(SemigroupError::Config(format!("A ladder must be positive: {a_ladder:?}")));
    }
    check_support(g, cfg.r, cfg.big_r)?;
    let times = sample_times(cfg.spec.horizon, cfg.samples);
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let beta = cfg.bound_exponent();
    for &a in a_ladder {
        let traj = Trajectory::propagated(g, &times, a, cfg.nu, cfg.alpha, exec)?;
        let m = mixed_norm(&traj, &cfg.spec, exec)?;
        if let Some(w) = m.warning {
            warnings.push(format!("A={a}: {w}"));
        }
        rows.push(StrichartzRow {
            amplitude: a,
            p: cfg.spec.p,
            q: cfg.spec.q,
            horizon: cfg.spec.horizon,
            mixed_norm: m.value,
            normalized_value: m.value * a.powf(beta),
        });
    }
    let fit = fit_decay(&rows.iter().map(|r| (r.amplitude, r.mixed_norm)).collect::<Vec<_>>())?;
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.normalized_value), hi.max(r.normalized_value)));
    Ok(StrichartzReport {
        rows,
        fit,
        variation: hi / lo,
        warnings,
    })
}
