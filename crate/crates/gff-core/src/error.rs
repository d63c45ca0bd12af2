use thiserror::Error;

/// Errors produced by graph construction, solvers and samplers.
#[derive(Debug, Error)]
pub enum GffError {
    /// Malformed or inconsistent input (bad ids, dimension mismatch, degenerate geometry).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A lattice/graph that violates a structural requirement (multi-edges,
    /// degenerate quadratic form, missing boundary).
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    /// Work or memory beyond the configured caps.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A linear solve or factorization failed; the message carries a
    /// condition diagnostic when one is available.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The requested operation is not defined for this graph
    /// (e.g. walk estimators on signed weights).
    #[error("unsupported graph: {0}")]
    Unsupported(String),

    /// Malformed file content (GFFG/GFFT/FLD1 parsers).
    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GffError>;
