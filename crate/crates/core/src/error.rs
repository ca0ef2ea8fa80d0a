use alloc::string::String;
use thiserror::Error;

/// Errors raised by the analysis core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("data error: non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("angle {0} deg is not on the beam grid")]
    OffGrid(f64),
    #[error("grid conflict: RX azimuth {0} deg is covered by two sectors away from a sector boundary")]
    GridConflict(f64),
    #[error("calibration is ill-conditioned: min |h_cal| = {min:e} below floor {floor:e}")]
    IllConditioned { min: f64, floor: f64 },
    #[error("missing directional profile for beam pair ({tx_deg} deg, {rx_deg} deg)")]
    MissingBeam { tx_deg: f64, rx_deg: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no signal: delay support is empty or carries zero power")]
    NoSignal,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("range error: {0}")]
    Range(String),
}

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad parameters or configuration.
    Config,
    /// Malformed or inconsistent data.
    Data,
    /// The numbers are valid but the computation has no meaningful answer.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidConfig(_) | Error::Range(_) | Error::OffGrid(_) => ErrorClass::Config,
            Error::Dimension(_)
            | Error::NonFinite(_)
            | Error::Grid(_)
            | Error::GridConflict(_)
            | Error::MissingBeam { .. }
            | Error::InsufficientData(_) => ErrorClass::Data,
            Error::IllConditioned { .. }
            | Error::Degenerate(_)
            | Error::Domain(_)
            | Error::NoSignal => ErrorClass::Numerical,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
