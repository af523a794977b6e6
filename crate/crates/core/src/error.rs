use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("evaluation point |z| = {0} lies outside the closed unit disk")]
    OutsideDisk(f64),

    #[error("boundary grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("leading denominator coefficient b_0 must be nonzero")]
    ZeroLeadingDenominator,

    #[error("frequency index {f} out of range for period {period}")]
    FrequencyOutOfRange { f: usize, period: usize },

    #[error("impulse response violates |k[{t}]| <= C*exp(-a*t): |{value}| > {bound}")]
    DecayViolated { t: usize, value: f64, bound: f64 },

    #[error("tap {t} = {value} outside its envelope {bound}")]
    TapOutsideEnvelope { t: usize, value: f64, bound: f64 },

    #[error("tap {t} = {value} is not a multiple of delta = {delta}")]
    TapOffGrid { t: usize, value: f64, delta: f64 },

    #[error("bitstring length {got} does not match expected {expected}")]
    BitLength { expected: usize, got: usize },

    #[error("magnitude index {index} at tap {t} exceeds envelope index {max}")]
    MagnitudeIndex { t: usize, index: u64, max: u64 },

    #[error("output weights are complex; conversion needs a real output layer")]
    ComplexOutput,

    #[error("state bias must be zero for conversion")]
    NonzeroStateBias,

    #[error("malformed container: {0}")]
    Container(String),
}
