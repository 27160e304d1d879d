use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {name} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("column {column} sums to {sum}, not 1")]
    NotStochastic { column: usize, sum: f64 },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("mitigation order {0} exceeds the supported maximum of {max}", max = crate::taylor::MAX_ORDER)]
    OrderTooLarge(usize),

    #[error("amplification exponent {0} must be odd and positive")]
    EvenPower(usize),

    #[error("parity window has even length {0}")]
    EvenWindow(usize),

    #[error("dense matrices are limited to {max} qubits, got {0}", max = crate::matrix::MAX_DENSE_QUBITS)]
    TooManyQubits(usize),

    #[error("amplification level {j} needs slots up to {needed} but records have {available}")]
    LevelNotCovered {
        j: usize,
        needed: usize,
        available: usize,
    },

    #[error("missing amplification level {0}")]
    MissingLevel(usize),

    #[error("inputs mix schemes {0} and {1}")]
    SchemeMismatch(String, String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("drift schedule: {0}")]
    InvalidSchedule(String),

    #[error("requested {requested} post-selection slots but records carry {available}")]
    PostSelectTooLong { requested: usize, available: usize },

    #[error("posterior is undefined: zero probability of the conditioning event")]
    ZeroDenominator,

    #[error("state space of 2^{bits} sequences exceeds the enumeration limit of 2^{limit}", limit = crate::analysis::oracle::MAX_SEQUENCE_BITS)]
    StateSpaceTooLarge { bits: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("record format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange { name, value })
    }
}
