//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape construction or validation failed.
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// Metric or solver parameters out of range.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A query endpoint lies strictly inside a hard obstacle.
    #[error("endpoint ({x}, {y}) lies inside a hard obstacle")]
    EndpointInObstacle { x: f64, y: f64 },

    /// No path between the endpoints: the obstacle phase separates them.
    #[error("disconnected: no path between the endpoints")]
    Disconnected,

    /// A query endpoint falls outside the discretized window.
    #[error("endpoint ({x}, {y}) outside the grid window")]
    OutsideWindow { x: f64, y: f64 },

    /// The requested grid exceeds the configured resource cap.
    #[error("resource limit: window of {cells:.1} cells per side exceeds the cap of {cap}")]
    ResourceLimit { cells: f64, cap: f64 },

    /// Configuration file or CLI argument error.
    #[error("config: {0}")]
    Config(String),

    /// Degenerate experiment input (e.g. coincident endpoints in a rate fit).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code class: 1 usage/config, 2 infeasible, 3 resource limit.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Disconnected | Error::EndpointInObstacle { .. } => 2,
            Error::ResourceLimit { .. } => 3,
            _ => 1,
        }
    }
}
