//! Crate-wide error type.
//!
//! Every failure mode carries enough context to act on: configuration
//! problems name the offending parameter, parse errors carry file/field
//! context, depth errors name the failing sector coordinate, and
//! internal-consistency errors carry a witness.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Unsupported or inconsistent configuration (e.g. a field order with
    /// no modulus table).
    #[error("configuration error: {0}")]
    Config(String),

    /// Caller violated a documented precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// Malformed input file.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    /// The depth hypothesis for a boundary computation failed: the sector
    /// coordinate `component` (1-based) of the reference vertex is too
    /// shallow.
    #[error("depth error: component {component} has depth {have}, need at least {need}")]
    Depth {
        component: usize,
        have: u32,
        need: u32,
    },

    /// A query reached past the available ball radius or sphere norm.
    #[error("range error: {0}")]
    Range(String),

    /// Construction exceeded its memory budget. `high_water` is the number
    /// of vertices materialised before giving up.
    #[error("budget exceeded: {high_water} vertices materialised, limit {limit}")]
    Budget { high_water: usize, limit: usize },

    /// An invariant the library relies on failed; indicates an invalid
    /// presentation or a table bug. Carries a witness.
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// The presentation was rejected during table construction.
    #[error("presentation rejected: {0}")]
    PresentationRejected(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
