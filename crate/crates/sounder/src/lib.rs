//! File formats, reports and the `mmw` pipeline driver on top of `mmw-core`.
//!
//! Captures and calibrations are stored in a small framed binary format
//! ([`format`]) with a lossless text dump ([`text`]). [`analyze`] runs the
//! per-location chain, [`fit`] builds the path-loss and delay-spread tables,
//! [`scene`] renders synthetic captures and [`probe`] designs the sounding
//! waveform.

pub mod analyze;
pub mod atomic;
pub mod cli;
pub mod config;
pub mod error;
pub mod fit;
pub mod format;
pub mod probe;
pub mod report;
pub mod scene;
pub mod text;

pub use error::{Result, SounderError};
