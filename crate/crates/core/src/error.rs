use thiserror::Error;

/// Errors produced by the ququart library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("all amplitudes vanish (max modulus {0:e})")]
    ZeroState(f64),

    #[error("wave tensor is not permutation symmetric (deviation {0:e})")]
    AsymmetricTensor(f64),

    #[error("wave tensor is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("invalid set of traced variables {indices:?} for a {n_photons}-photon matrix")]
    BadIndexSet { indices: Vec<usize>, n_photons: usize },

    #[error("density matrix dimension {0} is not 2, 4 or 8")]
    BadDimension(usize),

    #[error("Schmidt mode undefined: λ₋ = {0:e}")]
    DegenerateMode(f64),

    #[error("unsupported polarizer pattern {0}")]
    UnsupportedPolarizerPattern(String),

    #[error("coincidence data sum to zero")]
    EmptyData,

    #[error("missing coincidence channel {0}")]
    InsufficientData(String),

    #[error("state is not reducible to the ideal Schmidt form (best residual {0:e})")]
    NotReducible(f64),

    #[error("trilinear point has non-positive weight sum {0}")]
    DegeneratePoint(f64),

    #[error("bad range: {0}")]
    BadRange(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
