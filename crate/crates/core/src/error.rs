use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("arc {parent} -> {child} would create a directed cycle")]
    Cycle { parent: String, child: String },
}
