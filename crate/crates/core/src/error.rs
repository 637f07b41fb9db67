use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Everything here is an input or contract error. Numerical outcomes such as
/// divergence or non-integrability are reported through status enums, never
/// through `Error`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A distance evaluated to NaN, a negative number, or -inf.
    #[error("distance oracle returned {value}, which is not a valid metric value")]
    NonMetricValue { value: f64 },

    #[error("parameter {t} lies outside the domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },

    #[error("anchor list is empty")]
    EmptyAnchors,

    #[error("anchors {first} and {second} coincide")]
    DuplicateAnchor { first: usize, second: usize },

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("range [{range_lo}, {range_hi}] of the inner function is not inside the domain [{domain_lo}, {domain_hi}]")]
    RangeMismatch {
        range_lo: f64,
        range_hi: f64,
        domain_lo: f64,
        domain_hi: f64,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid interval union: {0}")]
    InvalidIntervalUnion(String),

    #[error("grid is not strictly increasing at index {index}")]
    UnorderedGrid { index: usize },

    #[error("path is not injective: {0}")]
    NotInjective(String),

    #[error("csv input, row {row}: {message}")]
    Csv { row: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
