use std::io;

use thiserror::Error;

use crate::format::AuthFail;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("authentication failed")]
    AuthFail,
    #[error("invalid geometry: {0}")]
    BadGeometry(&'static str),
    #[error("outer and hidden passwords must differ")]
    PasswordsEqual,
    #[error("sector {index} out of range (volume has {count} sectors)")]
    OutOfRange { index: u64, count: u64 },
    #[error("write to sector {index} would overwrite the protected hidden volume")]
    ProtectedRangeViolation { index: u64 },
    #[error("volume handle is closed")]
    UseAfterClose,
    #[error("volume too small for a file store ({sectors} sectors, need at least {needed})")]
    VolumeTooSmall { sectors: u64, needed: u64 },
    #[error("file store superblock is missing or damaged")]
    BadSuperblock,
    #[error("a file with that name already exists")]
    NameExists,
    #[error("file name longer than 255 bytes")]
    NameTooLong,
    #[error("file name must not be empty")]
    InvalidName,
    #[error("no contiguous free extent large enough")]
    NoSpace,
    #[error("catalog is full")]
    CatalogFull,
    #[error("no such file")]
    NotFound,
    #[error("stored data is corrupt")]
    CorruptData,
}

impl From<AuthFail> for Error {
    fn from(_: AuthFail) -> Self {
        Error::AuthFail
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
