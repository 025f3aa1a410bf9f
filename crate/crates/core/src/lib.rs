//! Pseudo-spectral laboratory for the two-dimensional dissipative
//! quasi-geostrophic equation with dispersive forcing
//!
//! `∂ₜθ + u·∇θ + ν|D|^α θ + A u₂ = 0`, `u = R^⊥θ`,
//!
//! together with the harmonic-analysis machinery used to probe its linear and
//! nonlinear estimates numerically.

pub mod par;
pub mod spectral;

pub use par::Exec;
pub mod fit;
pub mod littlewood_paley;
pub mod kernel;
pub mod semigroup;
pub mod solver;
pub mod experiment;
