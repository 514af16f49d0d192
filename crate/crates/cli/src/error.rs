use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] gabor_phase::Error),

    /// A self-check reported failures.
    #[error("{0} self-test check(s) failed")]
    SelfTest(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gabor_phase::Error as E;
        match self {
            CliError::Validation(_) => 2,
            CliError::Io { .. } => 4,
            CliError::SelfTest(_) => 3,
            CliError::Core(e) => match e {
                E::Domain(_) | E::Usage(_) | E::Parse { .. } => 2,
                E::Io(_) => 4,
                _ => 3,
            },
        }
    }
}
