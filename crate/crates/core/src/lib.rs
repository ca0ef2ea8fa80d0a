//! Allocation-only core of a switched-beam mm-wave channel-sounder analysis
//! toolkit.
//!
//! The processing chain runs from frequency-response tensors captured over a
//! TX/RX beam grid ([`capture`]) to directional and omnidirectional power
//! delay profiles ([`beam`]), noise-gated delay-spread statistics
//! ([`delay`]), close-in and alpha-beta-gamma path-loss fits with a
//! Kolmogorov-Smirnov shadowing check ([`pathloss`]), and multipath
//! extraction ([`mpc`]). [`waveform`] designs the low-PAPR multitone probe
//! and [`synth`] renders ground-truth scenes for closed-loop checks.
//!
//! The crate is `no_std` and needs only `alloc`; storage formats and the
//! command-line driver live in the `mmw-sounder` crate.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod beam;
pub mod capture;
pub mod delay;
pub mod error;
pub mod fft;
pub mod math;
pub mod mpc;
pub mod pathloss;
pub mod synth;
pub mod waveform;

pub use beam::{DelayProfile, DirectionalPdps, ProfileKind};
pub use capture::{BeamGrid, CalibrationProfile, LocationMeta, MeasurementCapture, Scenario, SounderConfig};
pub use error::{Error, ErrorClass, Result};
pub use mpc::MultipathComponent;
pub use pathloss::{FitReport, ModelFamily, PathLossModel};
