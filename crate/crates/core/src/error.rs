use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("no travelling wave: {0}")]
    NoWaveRegime(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("iterates collapsed to zero after {iterations} iterations")]
    CollapseToZero { iterations: usize },
    #[error("ill-posed: {0}")]
    IllPosed(String),
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
    #[error("tail not resolved: {0}")]
    NotTailDominated(String),
    #[error("time step {dt:.3e} exceeds stability bound {bound:.3e}")]
    Cfl { dt: f64, bound: f64 },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
