//! File formats, configuration and the check → solve → verify pipeline
//! around `hopf-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod gridio;
pub mod pipeline;
pub mod report;

use thiserror::Error;

pub use config::RunConfig;
pub use pipeline::{cmd_check, cmd_solve, cmd_verify, Outcome};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_NONCONVERGENCE: u8 = 3;

/// Errors that stop a command before it reaches a verdict.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing artifact {0} (run the earlier stage first)")]
    MissingArtifact(String),
    #[error("bad artifact: {0}")]
    Artifact(String),
    #[error("i/o: {0}")]
    Io(String),
    /// A solve failed without an iterate to write.
    #[error("solver: {0}")]
    Solver(String),
}

impl LabError {
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Solver(_) => EXIT_NONCONVERGENCE,
            _ => EXIT_CONFIG,
        }
    }
}
