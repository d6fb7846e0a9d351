use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point at or above the horizon: ỹ = {ytilde} must be below f·tanθ = {limit}")]
    AboveHorizon { ytilde: f64, limit: f64 },

    #[error("invalid camera configuration: {0}")]
    InvalidCamera(String),

    #[error("no tile of side {side} cm fits inside the field of view")]
    EmptyGrid { side: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid binning: {0}")]
    Binning(String),

    #[error("degenerate score: joint entropy is zero (all mass in one cell)")]
    DegenerateScore,

    #[error("no candidates to match against")]
    NoCandidates,

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("variance mask needs n ≥ 2 image pairs, got n = {0}")]
    TooFewPairs(usize),

    #[error("image format error: {0}")]
    Image(String),

    #[error("empty result: nothing to write")]
    EmptyResult,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
