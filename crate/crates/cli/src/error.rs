use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("address {addr:#x}: {reason}")]
    Address { addr: u64, reason: &'static str },
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] dramtrojan_core::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
