use num_complex::Complex64;

use super::cutoff::chi;
use super::{SpectralError, Wavevector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Fourier multipliers used by the solver and the estimates.
///
/// Every symbol satisfies `m(-ξ) = conj(m(ξ))` on the lattice, and odd symbols
/// vanish at `ξ = 0` and on Nyquist lines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symbol {
    /// `|ξ|^α`.
    FractionalLaplacian { alpha: f64 },
    /// `-i ξ_j / |ξ|`, axis 1 or 2.
    Riesz { axis: u8 },
    /// `-i sgn(ξ_j)`, acting on the named axis only.
    Hilbert1D { axis: u8 },
    /// `i ξ_j`.
    Derivative { axis: u8 },
    /// `χ(|ξ|/R) (1 - χ(|ξ₁|/r))`.
    BandCutoff { r: f64, big_r: f64 },
    /// Indicator of the closed ball `|ξ| <= k`.
    BallProjection { k: f64 },
    /// `exp(i A t ξ₁/|ξ|)`.
    DispersivePhase { amplitude: f64, t: f64 },
    /// `exp(i A t ξ₁/|ξ| - ν t |ξ|^α)`.
    LinearPropagator {
        amplitude: f64,
        nu: f64,
        alpha: f64,
        t: f64,
    },
}

fn check_axis(axis: u8) -> Result<(), SpectralError> {
    if axis == 1 || axis == 2 {
        Ok(())
    } else {
        Err(SpectralError::Symbol(format!("axis must be 1 or 2, got {axis}")))
    }
}

fn check_alpha(alpha: f64) -> Result<(), SpectralError> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(SpectralError::Symbol(format!("alpha must lie in (0, 2], got {alpha}")))
    }
}

fn nonneg(name: &str, v: f64) -> Result<(), SpectralError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SpectralError::Symbol(format!("{name} must be >= 0, got {v}")))
    }
}

/// Phase function `a(ξ) = ξ₁/|ξ|` with `a(0) = 0`.
#[inline]
pub(crate) fn phase(w: &Wavevector) -> f64 {
    if w.norm == 0.0 {
        0.0
    } else {
        w.odd1 / w.norm
    }
}

impl Symbol {
    pub fn validate(&self) -> Result<(), SpectralError> {
        match *self {
            Symbol::FractionalLaplacian { alpha } => check_alpha(alpha),
            Symbol::Riesz { axis } | Symbol::Hilbert1D { axis } | Symbol::Derivative { axis } => {
                check_axis(axis)
            }
            Symbol::BandCutoff { r, big_r } => {
                if r > 0.0 && r < big_r && big_r.is_finite() {
                    Ok(())
                } else {
                    Err(SpectralError::Symbol(format!(
                        "band needs 0 < r < R, got r={r}, R={big_r}"
                    )))
                }
            }
            Symbol::BallProjection { k } => {
                if k > 0.0 {
                    Ok(())
                } else {
                    Err(SpectralError::Symbol(format!("ball radius must be > 0, got {k}")))
                }
            }
            Symbol::DispersivePhase { amplitude, t } => {
                nonneg("A", amplitude)?;
                nonneg("t", t)
            }
            Symbol::LinearPropagator {
                amplitude,
                nu,
                alpha,
                t,
            } => {
                nonneg("A", amplitude)?;
                nonneg("nu", nu)?;
                nonneg("t", t)?;
                check_alpha(alpha)
            }
        }
    }

    /// Value at one lattice point.
    #[inline]
    pub fn eval(&self, w: &Wavevector) -> Complex64 {
        match *self {
            Symbol::FractionalLaplacian { alpha } => {
                if w.norm == 0.0 {
                    ZERO
                } else {
                    Complex64::new(w.norm.powf(alpha), 0.0)
                }
            }
            Symbol::Riesz { axis } => {
                if w.norm == 0.0 {
                    return ZERO;
                }
                let odd = if axis == 1 { w.odd1 } else { w.odd2 };
                Complex64::new(0.0, -odd / w.norm)
            }
            Symbol::Hilbert1D { axis } => {
                let odd = if axis == 1 { w.odd1 } else { w.odd2 };
                if odd == 0.0 {
                    ZERO
                } else {
                    Complex64::new(0.0, -odd.signum())
                }
            }
            Symbol::Derivative { axis } => {
                let odd = if axis == 1 { w.odd1 } else { w.odd2 };
                Complex64::new(0.0, odd)
            }
            Symbol::BandCutoff { r, big_r } => {
                Complex64::new(chi(w.norm / big_r) * (1.0 - chi(w.xi1.abs() / r)), 0.0)
            }
            Symbol::BallProjection { k } => {
                if w.norm <= k {
                    ONE
                } else {
                    ZERO
                }
            }
            Symbol::DispersivePhase { amplitude, t } => {
                Complex64::from_polar(1.0, amplitude * t * phase(w))
            }
            Symbol::LinearPropagator {
                amplitude,
                nu,
                alpha,
                t,
            } => {
                let decay = if w.norm == 0.0 {
                    1.0
                } else {
                    (-nu * t * w.norm.powf(alpha)).exp()
                };
                Complex64::from_polar(decay, amplitude * t * phase(w))
            }
        }
    }
}
