use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("radical is undefined for non-positive input {0}")]
    NonPositive(i128),

    #[error("dimension g = {0} is not supported (supported: 1..=3)")]
    UnsupportedDimension(usize),

    #[error("prime set is empty")]
    EmptyPrimeSet,

    #[error("{what}: {size} candidates exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("{0}")]
    OutOfRange(String),

    #[error("checksum mismatch in {path}: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch {
        path: PathBuf,
        stored: u32,
        computed: u32,
    },

    #[error("malformed census file {path} at line {line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that come from a size cap rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}
