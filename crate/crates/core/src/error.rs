use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("d = {0} is a perfect square; the number would be rational")]
    RationalInput(u64),

    #[error("invalid irrational spec {0:?}: {1}")]
    InvalidSpec(String, String),

    #[error("continued fraction table too shallow: N = {n} needs a denominator above {n}, largest tabulated is {largest}")]
    TableTooShallow { n: u128, largest: u128 },

    #[error("continued fraction entry {index} overflows 128-bit storage")]
    TableOverflow { index: usize },

    #[error("multiplier {n} exceeds the precision budget N_max = {n_max}")]
    PrecisionBudget { n: u128, n_max: u64 },

    #[error("{bits} bits are not enough for N_max = {n_max}; at least {required} are needed")]
    InsufficientPrecision { bits: u32, n_max: u64, required: u32 },

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("invalid extremal configuration: {0}")]
    InvalidExtremal(String),

    #[error("{name} = {value} is out of range: {expected}")]
    OutOfRange {
        name: &'static str,
        value: String,
        expected: &'static str,
    },

    #[error("trace lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("{0} is not a tabulated best approximation denominator")]
    NotADenominator(u128),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn out_of_range(
    name: &'static str,
    value: impl ToString,
    expected: &'static str,
) -> Error {
    Error::OutOfRange {
        name,
        value: value.to_string(),
        expected,
    }
}
