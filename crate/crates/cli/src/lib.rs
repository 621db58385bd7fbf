//! Command-line driver for the solver: scene runs, frame audits and the
//! β-formula comparison.

pub mod ablation;
pub mod audit;
pub mod obj;
pub mod report;
pub mod run;

use pncg_core::sim::SceneError;

/// Process exit status of each failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const PENETRATION: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("{0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver aborted: {0}")]
    Solver(String),
    #[error("penetration: {0}")]
    Penetration(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scene(_) | CliError::Config(_) | CliError::Io(_) => exit::CONFIG,
            CliError::Solver(_) => exit::SOLVER,
            CliError::Penetration(_) => exit::PENETRATION,
        }
    }
}
