use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("t = {t} is outside the existence interval [0, {t_max})")]
    OutsideExistence { t: f64, t_max: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-manifold input: {0}")]
    NonManifold(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("OFF parse error at line {line}: {msg}")]
    OffParse { line: usize, msg: String },

    #[error("domain is disconnected")]
    Disconnected,

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("input too large: {0}")]
    TooLarge(String),

    #[error("function is constant; Rayleigh quotient undefined")]
    ConstantFunction,

    #[error("partition has an empty interface")]
    EmptyInterface,

    #[error("data error: {0}")]
    Data(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
