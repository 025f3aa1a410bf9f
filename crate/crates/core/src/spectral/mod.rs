//! Periodic grid, spectral transforms and Fourier multipliers.
//!
//! Coefficients use the normalization `f(x) = Σ_k f̂(k) e^{iξ·x}` with
//! `f̂(k) = n⁻² Σ_j f(x_j) e^{-iξ·x_j}` and `ξ = (2π/L) k`. Under this choice
//! the grid quadrature of `|f|²` equals `L² Σ |f̂|²`.

mod cutoff;
mod field;
mod grid;
mod random;
mod symbol;

pub use cutoff::{chi, smooth_step_down};
pub use field::SpectralField;
pub use grid::{Grid, Wavevector};
pub use random::{gaussian_bump, random_field, RandomFieldSpec};
pub use symbol::Symbol;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    Config(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("invalid symbol: {0}")]
    Symbol(String),
}
