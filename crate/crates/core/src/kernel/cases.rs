use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use super::eval::check_tol;
use super::quad::adaptive;
use super::{KernelError, KernelParams};
use crate::spectral::chi;

const MAX_INTERVALS: usize = 4000;
const MAX_LEVELS: u32 = 20;

/// `H̃(μ, φ) = ∫_0^{2R} ∫_{r/2}^{2R} [1 + μξ₂²(ξ₁cos φ - ξ₂ sin φ)²/(8R³)]^{-1} dξ₁ dξ₂`.
///
/// The inner integral is an arctangent difference; the outer one is
/// adaptive Gauss–Kronrod to relative `tol`.
pub fn eval_htilde(mu: f64, phi: f64, r: f64, big_r: f64, tol: f64) -> Result<f64, KernelError> {
    check_tol(tol)?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(KernelError::Config(format!("mu must be finite and >= 0, got {mu}")));
    }
    if !(0.0..=FRAC_PI_2).contains(&phi) {
        return Err(KernelError::Config(format!("phi must lie in [0, pi/2], got {phi}")));
    }
    if !(r > 0.0 && r < big_r && big_r.is_finite()) {
        return Err(KernelError::Config(format!("need 0 < r < R, got r={r}, R={big_r}")));
    }
    let (a, b) = (0.5 * r, 2.0 * big_r);
    let (cs, sn) = (phi.cos(), phi.sin());
    let kappa = (mu / (8.0 * big_r.powi(3))).sqrt();
    let inner = |x2: f64| {
        let k = kappa * x2;
        let x = k * (b * cs - x2 * sn);
        let y = k * (a * cs - x2 * sn);
        let kc = k * cs;
        if kc == 0.0 {
            (b - a) / (1.0 + x * y)
        } else {
            (kc * (b - a)).atan2(1.0 + x * y) / kc
        }
    };
    adaptive(inner, 0.0, b, 0.0, tol, MAX_INTERVALS)
        .map(|q| q.value)
        .map_err(|q| KernelError::Accuracy {
            estimate: q.value.into(),
            error: q.error,
            nodes: q.evals,
        })
}

/// `H(t, μ, z₂, ξ₁) = ∫ Ψ(ξ) e^{iμξ₁/|ξ| + iz₂ξ₂ - νt|ξ|^α} dξ₂`, with the band
/// `(r, R)`, `α` and `ν` taken from `params`.
///
/// Trapezoid rule over the chord `|ξ₂| <= √(4R² - ξ₁²)`, doubled until two
/// levels agree to `tol` relative to the `μ = 0` magnitude.
pub fn eval_h_aniso(
    t: f64,
    mu: f64,
    z2: f64,
    xi1: f64,
    params: &KernelParams,
    tol: f64,
) -> Result<Complex64, KernelError> {
    params.validate()?;
    check_tol(tol)?;
    if !(t >= 0.0 && mu >= 0.0 && z2.is_finite() && mu.is_finite()) {
        return Err(KernelError::Config(format!("need t >= 0, finite mu >= 0 and z2, got t={t}, mu={mu}, z2={z2}")));
    }
    let (r, big_r) = (params.r, params.big_r);
    if !(xi1.abs() >= 0.5 * r && xi1.abs() <= 2.0 * big_r) {
        return Err(KernelError::Config(format!("|xi1| must lie in [r/2, 2R], got {xi1}")));
    }
    let cut1 = 1.0 - chi(2.0 * xi1 / r);
    let half = (4.0 * big_r * big_r - xi1 * xi1).max(0.0).sqrt();
    let nu_t = params.nu * t;
    let f = |x2: f64| {
        let rho = xi1.hypot(x2);
        let amp = chi(rho / big_r) * cut1 * (-nu_t * rho.powf(params.alpha)).exp();
        Complex64::from_polar(amp, mu * xi1 / rho + z2 * x2)
    };
    // phase slope bound |∂ξ₂(μξ₁/|ξ|)| <= μ/(2|ξ₁|), plus a fixed amplitude bandwidth
    let freq = mu / (2.0 * xi1.abs()) + z2.abs() + 400.0;
    let mut n = ((2.0 * half * freq / TAU).ceil() as usize).max(64);
    let mut prev: Option<Complex64> = None;
    let mut diff = f64::INFINITY;
    let mut used = 0u64;
    let scale = (2.0 * half * cut1).max(f64::MIN_POSITIVE);
    for _ in 0..MAX_LEVELS {
        if used + n as u64 > super::NODE_BUDGET {
            break;
        }
        let d = 2.0 * half / n as f64;
        let v: Complex64 = (1..n).map(|j| f(-half + j as f64 * d)).sum::<Complex64>() * d;
        used += n as u64;
        if let Some(p) = prev {
            diff = (v - p).norm();
            if diff <= tol * v.norm().max(super::FLOOR * scale) {
                return Ok(v);
            }
        }
        prev = Some(v);
        n *= 2;
    }
    Err(KernelError::Accuracy {
        estimate: prev.unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        error: diff,
        nodes: used,
    })
}
