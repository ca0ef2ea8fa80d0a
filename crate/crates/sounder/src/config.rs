//! Run configuration: an optional JSON file, overridden field by field by
//! command-line flags.

use std::path::{Path, PathBuf};

use mmw_core::beam::Window;
use mmw_core::delay::{DEFAULT_TAIL_FRACTION, DIRECTIONAL_GATE_FACTOR, SUPPORT_FACTOR};
use mmw_core::Scenario;
use serde::Deserialize;

use crate::error::{Result, SounderError};
use crate::report::Formats;

/// Every field optional; used both for the file and for the flag overlay.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigLayer {
    pub inputs: Option<Vec<PathBuf>>,
    pub calibration: Option<PathBuf>,
    /// Overrides the scenario stored in every input capture.
    pub scenario: Option<String>,
    pub tail_fraction: Option<f64>,
    pub directional_gate_factor: Option<f64>,
    pub support_factor: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub formats: Option<Vec<String>>,
    /// "none" or "hann".
    pub window: Option<String>,
    /// Carrier frequency for the fit stage (FSPL anchor and 3GPP means).
    pub center_freq_hz: Option<f64>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SounderError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| SounderError::Config(format!("{}: {e}", path.display())))
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overlay(self, flags: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            inputs: flags.inputs.filter(|v| !v.is_empty()).or(self.inputs),
            calibration: flags.calibration.or(self.calibration),
            scenario: flags.scenario.or(self.scenario),
            tail_fraction: flags.tail_fraction.or(self.tail_fraction),
            directional_gate_factor: flags.directional_gate_factor.or(self.directional_gate_factor),
            support_factor: flags.support_factor.or(self.support_factor),
            output_dir: flags.output_dir.or(self.output_dir),
            formats: flags.formats.filter(|v| !v.is_empty()).or(self.formats),
            window: flags.window.or(self.window),
            center_freq_hz: flags.center_freq_hz.or(self.center_freq_hz),
        }
    }

    pub fn load(file: Option<&Path>, flags: ConfigLayer) -> Result<Self> {
        let base = match file {
            Some(p) => ConfigLayer::from_file(p)?,
            None => ConfigLayer::default(),
        };
        Ok(base.overlay(flags))
    }
}

/// Resolved settings for `analyze`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub calibration: PathBuf,
    pub scenario: Option<Scenario>,
    pub tail_fraction: f64,
    pub directional_gate_factor: f64,
    pub support_factor: f64,
    pub output_dir: PathBuf,
    pub formats: Formats,
    pub window: Window,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(SounderError::Config(format!("{name} must be positive, got {v}")))
    }
}

pub(crate) fn parse_scenario(label: &str) -> Result<Scenario> {
    Scenario::from_label(label)
        .ok_or_else(|| SounderError::Config(format!("unknown scenario {label:?} (expected street28 or nlos)")))
}

pub(crate) fn parse_formats(list: Option<Vec<String>>) -> Result<Formats> {
    match list {
        Some(l) => Formats::parse(&l),
        None => Ok(Formats::default()),
    }
}

impl RunConfig {
    pub fn resolve(layer: ConfigLayer) -> Result<Self> {
        let inputs = layer.inputs.unwrap_or_default();
        if inputs.is_empty() {
            return Err(SounderError::Config("no input captures given".into()));
        }
        let calibration = layer
            .calibration
            .ok_or_else(|| SounderError::Config("no calibration file given".into()))?;
        let tail_fraction = layer.tail_fraction.unwrap_or(DEFAULT_TAIL_FRACTION);
        if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
            return Err(SounderError::Config(format!("tail_fraction must be in (0, 0.5], got {tail_fraction}")));
        }
        let window = match layer.window.as_deref().unwrap_or("none") {
            "none" => Window::None,
            "hann" => Window::Hann,
            other => return Err(SounderError::Config(format!("unknown window {other:?}"))),
        };
        Ok(RunConfig {
            inputs,
            calibration,
            scenario: layer.scenario.as_deref().map(parse_scenario).transpose()?,
            tail_fraction,
            directional_gate_factor: positive(
                "directional_gate_factor",
                layer.directional_gate_factor.unwrap_or(DIRECTIONAL_GATE_FACTOR),
            )?,
            support_factor: positive("support_factor", layer.support_factor.unwrap_or(SUPPORT_FACTOR))?,
            output_dir: layer.output_dir.unwrap_or_else(|| PathBuf::from("mmw-report")),
            formats: parse_formats(layer.formats)?,
            window,
        })
    }
}
