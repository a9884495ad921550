use std::path::PathBuf;

use thiserror::Error;

/// Exit status when every requested certificate holds.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Core(#[from] aorhb_core::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use aorhb_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Csv { .. } => EXIT_CONFIG,
            CliError::Core(e) => match e {
                E::InvalidInput(_) | E::Construction(_) | E::Parse { .. } => EXIT_CONFIG,
                E::Divergence { .. } | E::NonFinite { .. } | E::Integration { .. } => EXIT_DIVERGENCE,
                E::Prox { .. } | E::Solve { .. } | E::InsufficientData(_) => EXIT_DIVERGENCE,
                E::CertificateIntegrity(_) => EXIT_CERTIFICATE,
            },
        }
    }
}
