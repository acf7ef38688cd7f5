use thiserror::Error;

/// Crate-wide error type. Constructors validate their inputs and report the
/// first violation they find.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid demand model: {0}")]
    InvalidDemand(String),

    #[error("demand for market node {node} too short: horizon {needed}, got {got}")]
    DemandTooShort {
        node: String,
        needed: usize,
        got: usize,
    },

    #[error("node {0} is not connected to the market side")]
    Unreachable(String),

    #[error("network has no source nodes; every node places orders upstream")]
    NoSourceNodes,

    #[error(
        "layer assignment is not unique; layer-wise BWE is undefined, \
         use node-to-node BWE instead"
    )]
    NonUniqueLayers,

    #[error("input sequence has zero variance; BWE ratio is undefined")]
    ZeroInputVariance,

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sequence length {0} is not even and >= 4")]
    BadDftLength(usize),

    #[error("amplification system diverges: spectral radius estimate {0:.6} >= 1")]
    Divergent(f64),

    #[error("singular linear system in amplification solve")]
    Singular,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
