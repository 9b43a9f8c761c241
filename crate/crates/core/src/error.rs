//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An elementary function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String },

    #[error("unbound parameter `{name}`")]
    UnboundParameter { name: String },

    #[error("unknown geometry `{0}`")]
    UnknownGeometry(String),

    /// The direction is tangent to the contact distribution (Δ = y′ − p ≈ 0).
    #[error("direction is tangent to the contact distribution (|delta| = {delta:e})")]
    Tangency { delta: f64 },

    /// Vertical (fiber) directions have no chain projection.
    #[error("direction is vertical; chains need non-vertical directions")]
    VerticalDirection,

    #[error("state left R^n at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("singular metric at ({x}, {y}, {p})")]
    SingularMetric { x: f64, y: f64, p: f64 },

    #[error("pole: {0}")]
    Pole(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
