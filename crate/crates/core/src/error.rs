use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid dissimilarity matrix: {0}")]
    InvalidDissimilarity(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("weight vectors differ beyond tolerance")]
    WeightMismatch,

    #[error("matrix is not a standard kernel: {0}")]
    NotStandardKernel(String),

    #[error(
        "dissimilarities are not squared Euclidean (min kernel eigenvalue {min_eigenvalue:.3e})"
    )]
    NotEuclidean { min_eigenvalue: f64 },

    #[error("kernel is identically zero; quantity undefined")]
    ZeroKernel,

    #[error("spectrum is identically zero; quantity undefined")]
    ZeroSpectrum,

    #[error("flat spectrum (zero spectral variance); quantity undefined")]
    FlatSpectrum,

    #[error("null variance is zero; significance test degenerate")]
    ZeroVariance,

    #[error("unsupported moment order q = {q}")]
    UnsupportedOrder { q: usize },

    #[error("{what} requires n >= {min}, got n = {n}")]
    SmallN {
        n: usize,
        min: usize,
        what: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
