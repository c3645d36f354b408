use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field} = {value} is out of range: {reason}")]
    PowerOutOfRange {
        field: String,
        value: f64,
        reason: &'static str,
    },

    #[error("power budget exceeded: {what} = {total} > 1")]
    BudgetExceeded { what: String, total: f64 },

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("honest power is zero, relative extra reward is undefined")]
    DivisionByZero,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{n} pools requested, at most {max} are supported")]
    TooManyPools { n: usize, max: usize },

    #[error("payoff system is singular (determinant {det:e})")]
    SingularSystem { det: f64 },

    #[error("at least 2 rounds are needed for an error estimate, got {rounds}")]
    InsufficientSamples { rounds: u64 },

    #[error("scenario file, key `{key}`: {message}")]
    ScenarioFile { key: String, message: String },

    #[error("honest shares sum to {actual}, expected {expected}")]
    InconsistentDistribution { expected: f64, actual: f64 },
}

impl Error {
    pub(crate) fn out_of_range(field: impl Into<String>, value: f64, reason: &'static str) -> Self {
        Error::PowerOutOfRange {
            field: field.into(),
            value,
            reason,
        }
    }
}
