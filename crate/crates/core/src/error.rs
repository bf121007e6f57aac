use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice size L={0} must be odd and at least 3")]
    InvalidSize(usize),
    #[error("invalid region parameter: {0}")]
    InvalidRegion(String),
    #[error("invalid noise parameters p={p}, q={q}: both must lie in [0, 1]")]
    InvalidNoise { p: f64, q: f64 },
    #[error("enumeration of {count} flag configurations exceeds the cap of {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },
    #[error("column sets overlap or do not partition the data columns")]
    BadColumnPartition,
    #[error("fit refused: {0}")]
    FitRefused(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal consistency fault: {0}")]
    Fault(String),
}

pub type Result<T> = std::result::Result<T, Error>;
