use thiserror::Error;

/// Errors surfaced by the library. Parse errors carry a position; model
/// errors are semantic (unknown states, dangling references, bad masses);
/// contract violations are caller bugs (empty generator lists, p outside
/// (0,1)).
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("model error: {0}")]
    Model(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
