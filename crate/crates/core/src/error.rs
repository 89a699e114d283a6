use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unknown interface id {0}")]
    UnknownInterface(usize),

    #[error("interface declaration does not match a subdomain side: {0}")]
    InterfaceMismatch(String),

    #[error("interface grids do not match: {0}")]
    GridMismatch(String),

    #[error("mortar space needs at least one interior node ({points} grid points given)")]
    MortarTooCoarse { points: usize },

    #[error("linear solver failure: {0}")]
    SolverFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error (line {line}): {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
