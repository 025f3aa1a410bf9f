//! Dyadic frequency decomposition, Besov norms and randomized audits of the
//! Bernstein, commutator and product estimates.

mod audit;
mod partition;

pub use audit::{
    bernstein_audit, commutator_audit, product_audit, AuditReport, AuditRow, BernsteinConfig,
    CommutatorConfig, ProductConfig,
};
pub use partition::{besov_norm, BesovNormSpec, DyadicPartition};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("block index {q} outside the resolvable range [{lo}, {hi}]")]
    Range { q: i32, lo: i32, hi: i32 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
}
