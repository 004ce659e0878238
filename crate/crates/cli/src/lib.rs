//! Reproducible experiments on harmonic functions over Riemannian cones.
//!
//! Every experiment is a pure function of an [`ExperimentConfig`] and returns
//! a [`Report`]: a numeric table with pass/fail status, written as CSV with a
//! `#`-prefixed JSON copy of the resolved configuration on the first line.

// `!(x <= tol)` also fails on NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{Amplitude, BoundarySpec, ExperimentConfig, ExperimentName, LinkSpec, Tolerances, WarpingSpec};
pub use experiments::run;
pub use report::Report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cone_harmonic::Error),
    #[error("invalid JSON configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// `2` for anything the user can fix in the configuration, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        use cone_harmonic::Error as E;
        match self {
            CliError::Config(_) | CliError::Json(_) => 2,
            CliError::Core(E::Config(_) | E::Validation(_) | E::Domain(_) | E::Capability(_) | E::Index(_)) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
