use thiserror::Error;

/// Errors raised by the numerical and analytical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size underflow at tau = {tau}: required step {step:e} is below 1e-12")]
    StepSizeUnderflow { tau: f64, step: f64 },

    #[error("non-finite state encountered at tau = {tau}")]
    NonFinite { tau: f64 },

    #[error("division by zero: slow amplitude is zero in the phase equation")]
    DivisionByZero,

    #[error("denominator of the frequency-response relation vanishes at Q = {q}, omega = {omega}")]
    PoleAtDenominator { q: f64, omega: f64 },

    #[error("no steady rotation with |b| = {b_abs} exists for these parameters")]
    NotExists { b_abs: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
