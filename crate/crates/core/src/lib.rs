//! Mating-of-trees bijections between lattice walks and decorated planar
//! maps, the structure graphs they encode, mated-CRT graphs built from
//! correlated Brownian surrogates, and desk-scale experiments on graph
//! distances in these objects.

pub mod bipolar;
pub mod coupling;
pub mod exponent;
pub mod io;
pub mod kreweras;
pub mod mullin;
pub mod orchestrator;
pub mod pmap;
pub mod rng;
pub mod stats;
pub mod structure;
pub mod walk;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid step distribution: {0}")]
    Distribution(String),
    #[error("window mismatch")]
    WindowMismatch,
    #[error("windows are not nested")]
    NotNested,
    #[error("map violation: {0}")]
    Map(String),
    #[error("graph is disconnected: {0}")]
    Disconnected(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(String),
    #[error("bad format: {0}")]
    Format(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn distribution(msg: impl Into<String>) -> Self {
        Error::Distribution(msg.into())
    }
    pub fn map(msg: impl Into<String>) -> Self {
        Error::Map(msg.into())
    }
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
