//! Oscillatory kernel `K(t, μ, z)`, the case integrals `H̃(μ, φ)`, the
//! anisotropic line kernel `H`, and sweeps of `sup_z |K|` over `μ`.
//!
//! `K` is real and even in `z₂` for every `μ` and `z`. It is not even in
//! `z₁`: reflecting `z` flips the sign of the phase amplitude `μ`.

mod cases;
mod eval;
mod quad;
mod sweep;

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use crate::fit::{fit_decay, DecayFit, FitError};
pub use cases::{eval_h_aniso, eval_htilde};
pub use eval::{eval_kernel_k, kernel_envelope, FLOOR, NODE_BUDGET};
pub use sweep::{sweep_kernel_sup, SupSample, ZSampling};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("invalid kernel configuration: {0}")]
    Config(String),
    /// The refinement did not converge within the node budget. `estimate`
    /// is NaN when not even the coarsest level fit.
    #[error("quadrature did not converge: estimate {estimate}, error bound {error:e}, {nodes} nodes")]
    Accuracy { estimate: Complex64, error: f64, nodes: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    pub t: f64,
    pub mu: f64,
    pub z: [f64; 2],
    pub r: f64,
    pub big_r: f64,
    pub alpha: f64,
    pub nu: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            t: 0.1,
            mu: 0.0,
            z: [0.0, 0.0],
            r: 1.0,
            big_r: 4.0,
            alpha: 0.5,
            nu: 1.0,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<(), KernelError> {
        let bad = |m: String| Err(KernelError::Config(m));
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return bad(format!("t must be finite and >= 0, got {}", self.t));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be finite and >= 0, got {}", self.mu));
        }
        if !self.z.iter().all(|c| c.is_finite()) {
            return bad(format!("z must be finite, got {:?}", self.z));
        }
        if !(self.r > 0.0 && self.r < self.big_r && self.big_r.is_finite()) {
            return bad(format!("need 0 < r < R, got r={}, R={}", self.r, self.big_r));
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return bad(format!("alpha must lie in (0, 2], got {}", self.alpha));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be finite and >= 0, got {}", self.nu));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    /// Absolute error estimate.
    pub est_err: f64,
    /// Integrand evaluations spent, including setup.
    pub nodes: u64,
    /// `∫ Ψ e^{-νt|ξ|^α} dξ`.
    pub envelope: f64,
}

/// One CSV line of a kernel evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelRow {
    pub t: f64,
    pub mu: f64,
    pub z1: f64,
    pub z2: f64,
    #[serde(rename = "re_K")]
    pub re_k: f64,
    #[serde(rename = "im_K")]
    pub im_k: f64,
    #[serde(rename = "abs_K")]
    pub abs_k: f64,
    pub est_err: f64,
    /// False when the value is a best estimate from an accuracy failure.
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRow {
    pub sweep_id: String,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub range_lo: f64,
    pub range_hi: f64,
}

impl FitRow {
    pub fn new(sweep_id: impl Into<String>, fit: &DecayFit) -> Self {
        Self {
            sweep_id: sweep_id.into(),
            slope: fit.slope,
            intercept: fit.intercept,
            residual: fit.residual,
            range_lo: fit.range_lo,
            range_hi: fit.range_hi,
        }
    }
}

pub fn write_csv<W: Write, T: Serialize>(rows: &[T], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
