use thiserror::Error;

/// Errors raised by planning, steering and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `omega * duration` is not a positive integer multiple of 2π.
    #[error("invalid frequency: omega = {omega}, T = {duration} (omega*T must be a positive multiple of 2*pi)")]
    InvalidFrequency { omega: f64, duration: f64 },

    #[error("time {t} outside phase interval [0, {duration}]")]
    OutOfRange { t: f64, duration: f64 },

    #[error("invalid step: dt = {dt} does not divide phase duration {duration}")]
    InvalidStep { dt: f64, duration: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
