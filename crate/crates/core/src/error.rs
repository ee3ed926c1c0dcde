use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("0^0 is undefined")]
    UndefinedZeroPower,
    #[error("division by zero in GF(2^m)")]
    DivisionByZero,
    #[error("polynomial 0x{poly:x} is not primitive for m={m}")]
    NotPrimitive { m: u32, poly: u32 },
    #[error("field consistency failure: {0}")]
    FieldConsistency(String),
    #[error("designed distance leaves no information bits (t={t})")]
    NoDimension { t: usize },
    #[error("matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("unsupported extension degree m={0}")]
    UnsupportedM(u32),
    #[error("no code matches {0}")]
    UnknownCode(String),
    #[error("curve never crosses target BER {target:e}")]
    NoCrossing { target: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
