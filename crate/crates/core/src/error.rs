use thiserror::Error;

use crate::hardy::RieszReport;

/// Errors shared by all modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is valid mathematically but outside what is implemented
    /// (for example pointwise harmonics in dimension 4).
    #[error("unsupported: {0}")]
    Capability(String),
    /// A documented precondition between arguments does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Input size exceeds a hard implementation limit.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A kernel denominator vanishes at the requested point.
    #[error("singular kernel: {0}")]
    Singularity(String),
    /// Boundary data carries energy at circle frequencies a trace cannot have.
    #[error("inadmissible boundary data: {0}")]
    Inadmissible(RieszReport),
    /// A component measure has a significantly negative atom.
    #[error("pseudo-positivity violated at mode (k={k}, l={ell}): atom weight {weight:e}")]
    PseudoPositivity { k: usize, ell: usize, weight: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
