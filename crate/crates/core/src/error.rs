use thiserror::Error;

/// Errors raised by every stage of the pipeline.
#[derive(Error, Debug)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("requested {requested} eigenpairs from an operator of dimension {dim}")]
    RankTooLarge { requested: usize, dim: usize },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("subspace collapsed: largest Ritz value {0:e} is below 1e-14")]
    SubspaceCollapse(f64),

    #[error("flattening norm {norm} exceeds 1 after projection ({which}); index convention is inconsistent")]
    IndexConvention { which: &'static str, norm: f64 },

    #[error("eigendecomposition failed to converge: {0}")]
    Eigen(String),

    #[error("contracted matrix is identically zero")]
    ZeroMatrix,

    #[error("no spectral gap: sigma1 = {sigma1:e}, sigma2 = {sigma2:e}")]
    NoSpectralGap { sigma1: f64, sigma2: f64 },

    #[error("dense oracle refused: dimension {dim} exceeds limit {limit}")]
    OracleTooLarge { dim: usize, limit: usize },

    #[error("bad file format: {0}")]
    Format(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
