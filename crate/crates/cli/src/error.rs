use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] galpat::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use galpat::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                E::InvalidParameter(_)
                | E::ShapeMismatch(_)
                | E::PhantomOutsideDisc { .. }
                | E::UnsupportedGenerator(_) => 2,
                E::Domain { .. } | E::DegenerateLatticeSum { .. } | E::Solver(_) => 3,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
