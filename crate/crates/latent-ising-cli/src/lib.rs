//! File formats and the `latent-ising` command-line workbench.

pub mod cli;
pub mod commands;
pub mod newick;
pub mod report;
pub mod samples;

use std::path::Path;

pub use cli::Cli;
pub use commands::execute;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Missing or contradictory arguments; exit status 2.
    #[error("{0}")]
    Usage(String),
    #[error("{code}: {0}", code = .0.code())]
    Domain(#[from] latent_ising::Error),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
