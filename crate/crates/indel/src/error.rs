use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size {0} outside 2..=65536")]
    InvalidAlphabet(u32),
    #[error("symbol {symbol} not in alphabet of size {size}")]
    SymbolOutOfRange { symbol: u32, size: u32 },
    #[error("sequences use different alphabets ({0} vs {1})")]
    AlphabetMismatch(u32, u32),
    #[error("edit pattern consumes {consumed} symbols but the source has {len}")]
    PatternLengthMismatch { consumed: usize, len: usize },
    #[error("edit cursor {cursor} invalid for sequence of length {len}")]
    CursorOutOfRange { cursor: usize, len: usize },
    #[error("stream ended early")]
    TruncatedStream,
    #[error("decoded stream failed its checksum")]
    ModelDesync,
    #[error("bad container magic")]
    BadMagic,
    #[error("unsupported container version {0}")]
    VersionUnsupported(u8),
    #[error("malformed container: {0}")]
    Malformed(&'static str),
    #[error("reconstructed sequence does not match the transmitted digest")]
    DigestMismatch,
    #[error("policy precondition violated: {0}")]
    PolicyPreconditionViolated(&'static str),
    #[error("complement does not line up with the typicalized pattern")]
    ComplementMisaligned,
    #[error("no typical edit pattern maps x onto y_hat")]
    Unalignable,
    #[error("instance too large: {0}")]
    InstanceTooLarge(&'static str),
    #[error("argument outside domain: {0}")]
    DomainError(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
