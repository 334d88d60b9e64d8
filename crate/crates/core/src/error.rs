//! Library error type.

/// Errors produced by configuration validation and the simulation engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent with others.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Back-substitution hit a stream with zero diagonal gain.
    #[error("stream {0} has zero diagonal gain; back-substitution is singular")]
    SingularStream(usize),
}

/// Convenience alias for results carrying [`Error`].
pub type Result<T> = std::result::Result<T, Error>;
