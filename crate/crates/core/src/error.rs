use alloc::string::String;
use core::fmt;

use crate::network::NetworkError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two sequences, fields or traces with different slot counts.
    LengthMismatch { left: usize, right: usize },
    /// A quarter-turn code outside `0..=3`.
    InvalidCode(u8),
    /// An operation restricted to GF(2) codes saw a code of 2 or 3.
    NotGf2 { sequence: u8, slot: usize },
    ZeroLength,
    InvalidParameter { name: &'static str, value: f64 },
    /// Balanced detection needs signal and LO on one common mode.
    ModeMismatch,
    DuplicateSequence(u8),
    UnknownSequence(u8),
    EmptyInput(&'static str),
    EmptyState,
    MissingRegisterSplit,
    RegisterOutOfRange { field: usize, width: usize },
    Network(NetworkError),
    Other(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {} slots vs {} slots", left, right)
            }
            Error::InvalidCode(q) => write!(f, "phase code {} is not a quarter-turn count in 0..=3", q),
            Error::NotGf2 { sequence, slot } => write!(
                f,
                "sequence {} has a non-GF(2) code at slot {}",
                sequence, slot
            ),
            Error::ZeroLength => write!(f, "a field needs at least one slot"),
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid value {} for parameter `{}`", value, name)
            }
            Error::ModeMismatch => {
                write!(f, "signal and local oscillator must occupy the same single mode")
            }
            Error::DuplicateSequence(id) => write!(f, "sequence {} selected more than once", id),
            Error::UnknownSequence(id) => write!(f, "sequence {} is not in the active family", id),
            Error::EmptyInput(what) => write!(f, "empty input: {}", what),
            Error::EmptyState => write!(f, "superposition state has no terms"),
            Error::MissingRegisterSplit => write!(f, "state has no register split"),
            Error::RegisterOutOfRange { field, width } => write!(
                f,
                "register references field {} but terms have {} fields",
                field, width
            ),
            Error::Network(e) => write!(f, "{}", e),
            Error::Other(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for Error {}

impl From<NetworkError> for Error {
    fn from(e: NetworkError) -> Self {
        Error::Network(e)
    }
}
