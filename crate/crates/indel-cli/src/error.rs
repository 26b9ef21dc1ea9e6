use thiserror::Error;

use crate::proto::ProtoError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Codec(#[from] indel::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Proto(#[from] ProtoError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error("benchmark check failed: {0}")]
    Check(String),
}

impl CliError {
    /// 2 I/O, 3 alphabet, 4 digest or corrupt delta, 5 refused by the sync
    /// peer, 6 failed benchmark check, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use indel::Error as E;
        match self {
            CliError::Io(_) | CliError::Codec(E::Io(_)) => 2,
            CliError::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => 2,
            CliError::Codec(E::AlphabetMismatch(..) | E::SymbolOutOfRange { .. }) => 3,
            CliError::Codec(
                E::DigestMismatch
                | E::ModelDesync
                | E::TruncatedStream
                | E::BadMagic
                | E::VersionUnsupported(_)
                | E::Malformed(_),
            ) => 4,
            CliError::Proto(ProtoError::Io(_)) => 2,
            CliError::Proto(_) => 5,
            CliError::Check(_) => 6,
            _ => 1,
        }
    }
}
