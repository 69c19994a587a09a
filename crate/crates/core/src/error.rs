use thiserror::Error;

/// Errors reported by grid construction, filter design and conversion.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sampling period must be positive and finite, got {0}")]
    NonPositivePeriod(f64),

    #[error("sampling instants not strictly increasing at index {index}: {prev} then {next}")]
    NonMonotone { index: usize, prev: f64, next: f64 },

    #[error("grid of kind `{kind}` cannot be extended with a `{attempted}` step")]
    AppendKindMismatch {
        kind: &'static str,
        attempted: &'static str,
    },

    #[error("filter order must be at least 1")]
    InvalidOrder,

    #[error("cutoff frequency must be positive and finite, got {0}")]
    InvalidCutoff(f64),

    #[error("transfer function is not strictly proper: {poles} poles, {zeros} zeros")]
    NotStrictlyProper { poles: usize, zeros: usize },

    #[error("pole {index} has non-negative real part {re}")]
    UnstablePole { index: usize, re: f64 },

    #[error("non-real {what} at index {index} has no exact conjugate partner")]
    UnpairedRoot { what: &'static str, index: usize },

    #[error("repeated complex-conjugate pole pairs are not supported (pole {re}{im:+}j)")]
    RepeatedComplexPole { re: f64, im: f64 },

    #[error("invalid section parameters: {0}")]
    InvalidSection(String),

    #[error("input index {got} out of order, expected {expected}")]
    OutOfOrderInput { expected: usize, got: usize },

    #[error("input instant {time} outside the step interval ({after}, {until}]")]
    InputOutsideStep { time: f64, after: f64, until: f64 },

    #[error("output instant {next} does not follow previous output instant {prev}")]
    NonIncreasingOutput { prev: f64, next: f64 },

    #[error("input instant {next} does not follow previous input instant {prev}")]
    NonIncreasingInput { prev: f64, next: f64 },

    #[error("output index {got} out of order, expected {expected}")]
    OutOfOrderOutput { expected: usize, got: usize },

    #[error("input underrun: no input beyond t = {0} buffered and stream not finished")]
    InputUnderrun(f64),

    #[error("input stream already finished")]
    StreamFinished,

    #[error("{values} input values but {instants} input instants")]
    LengthMismatch { values: usize, instants: usize },

    #[error("nominal period changed from {expected} to {got} within one stream")]
    PeriodMismatch { expected: f64, got: f64 },

    #[error("placement needs a nominal period but none was given")]
    MissingPeriod,

    #[error(
        "repeated-pole section started on a uniform input grid and cannot accept off-grid inputs"
    )]
    MixedInputGrid,

    #[error("empty parallel form")]
    EmptyForm,

    #[error("no output samples produced yet")]
    NoOutput,
}

pub type Result<T> = std::result::Result<T, Error>;
