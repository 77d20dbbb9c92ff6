use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid register: {0}")]
    Register(String),
    #[error("invalid gate: {0}")]
    Gate(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("connectivity graph is disconnected")]
    Disconnected,
    #[error("{0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("data: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
