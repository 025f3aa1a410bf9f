//! Least-squares power-law fits in log-log coordinates.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 4 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample range spans {0:.3} decades, need at least 2")]
    NarrowRange(f64),
    #[error("samples must be positive and finite: ({0}, {1})")]
    BadSample(f64, f64),
}

/// Result of fitting `log y = intercept + slope · log x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    /// Natural-log intercept.
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub range_lo: f64,
    pub range_hi: f64,
    pub n_samples: usize,
}

impl DecayFit {
    /// Prefactor `exp(intercept)`.
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }

    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

pub fn fit_decay(samples: &[(f64, f64)]) -> Result<DecayFit, FitError> {
    if samples.len() < 4 {
        return Err(FitError::TooFewSamples(samples.len()));
    }
    for &(x, y) in samples {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(FitError::BadSample(x, y));
        }
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let decades = (hi / lo).log10();
    if decades < 2.0 - 1e-12 {
        return Err(FitError::NarrowRange(decades));
    }
    let m = samples.len() as f64;
    let lx: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(DecayFit {
        slope,
        intercept,
        residual,
        range_lo: lo,
        range_hi: hi,
        n_samples: samples.len(),
    })
}
