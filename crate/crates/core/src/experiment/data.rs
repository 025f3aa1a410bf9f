use super::{DataKind, DataSection, ExperimentConfig, ExperimentError};
use crate::solver::Profile1D;
use crate::spectral::{gaussian_bump, random_field, Grid, RandomFieldSpec, SpectralField};

/// `a·[g(x - c - d/2 e₁) - g(x - c + d/2 e₁)]` with Gaussian `g` of width `w`
/// and `c` the box centre. Mean zero, and `f̂` vanishes on `ξ₁ = 0`.
pub fn vortex_pair(grid: &Grid, width: f64, separation: f64, amplitude: f64) -> SpectralField {
    let c = 0.5 * grid.box_length();
    let mut f = gaussian_bump(grid, (c + 0.5 * separation, c), width, amplitude);
    f.add_scaled_assign(&gaussian_bump(grid, (c - 0.5 * separation, c), width, amplitude), -1.0);
    f
}

/// Datum described by the `[data]` section.
pub fn initial_datum(grid: &Grid, cfg: &ExperimentConfig) -> Result<SpectralField, ExperimentError> {
    let d: &DataSection = &cfg.data;
    let f = match d.kind {
        DataKind::VortexPair => vortex_pair(grid, d.width, d.separation, d.amplitude),
        DataKind::Random => {
            let spec = RandomFieldSpec {
                max_freq: d.max_freq,
                l2_norm: Some(d.amplitude.abs()),
                ..RandomFieldSpec::default()
            };
            random_field(grid, &spec, cfg.seed, 0)
        }
    };
    match d.h_norm {
        None => Ok(f),
        Some(h) => {
            let now = f.sobolev_sq(2.0 - cfg.alpha, false).sqrt();
            if now == 0.0 {
                return Err(ExperimentError::Config("cannot rescale a zero datum".into()));
            }
            Ok(f.scaled(h / now))
        }
    }
}

/// `θ̄₀(x₂) = a·exp(-(x₂ - L/2)²/(2w²))` and the `[data]` datum as `θ̃₀`.
pub fn mixed_datum(grid: &Grid, cfg: &ExperimentConfig) -> Result<(Profile1D, SpectralField), ExperimentError> {
    let (a, w) = (cfg.converge.bar_amplitude, cfg.converge.bar_width);
    if !(w > 0.0 && a.is_finite()) {
        return Err(ExperimentError::Config("converge: need bar_width > 0 and finite bar_amplitude".into()));
    }
    let c = 0.5 * grid.box_length();
    let bar = Profile1D::from_fn(grid, |x| a * (-(x - c).powi(2) / (2.0 * w * w)).exp())?;
    Ok((bar, initial_datum(grid, cfg)?))
}
