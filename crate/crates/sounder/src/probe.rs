//! `waveform`: low-PAPR multitone design.

use std::f64::consts::TAU;
use std::path::Path;

use mmw_core::waveform::{optimize_phases, papr_db, MultitoneSpec, MIN_PAPR_OVERSAMPLE};
use serde::Serialize;

use crate::analyze::StageError;
use crate::report::{num, Table, WAVEFORM_COLUMNS};

#[derive(Debug, Clone, Serialize)]
pub struct WaveformSummary {
    pub num_tones: usize,
    pub tone_spacing_hz: f64,
    pub bandwidth_hz: f64,
    pub duration_s: f64,
    pub target_papr_db: f64,
    pub papr_db: f64,
    pub initial_papr_db: f64,
    pub reached_target: bool,
    pub iterations: usize,
}

impl WaveformSummary {
    /// `key value` lines for the terminal.
    pub fn to_text(&self) -> String {
        format!(
            "tones            {}\nspacing          {} kHz\nbandwidth        {} MHz\nduration         {} us\npapr             {:.3} dB\ninitial papr     {:.3} dB\ntarget           {} dB ({})\niterations       {}\n",
            self.num_tones,
            self.tone_spacing_hz / 1e3,
            self.bandwidth_hz / 1e6,
            self.duration_s * 1e6,
            self.papr_db,
            self.initial_papr_db,
            self.target_papr_db,
            if self.reached_target { "reached" } else { "not reached" },
            self.iterations,
        )
    }
}

pub fn design(
    num_tones: usize,
    tone_spacing_hz: f64,
    target_papr_db: f64,
    max_iters: usize,
) -> Result<(MultitoneSpec, WaveformSummary), StageError> {
    let at = |e| StageError::new("waveform", e);
    let (spec, papr, initial, reached, iterations) = if num_tones == 1 {
        // A single tone is already constant-envelope.
        let spec = MultitoneSpec::zero_phase(1, tone_spacing_hz).map_err(at)?;
        let p = papr_db(&spec, MIN_PAPR_OVERSAMPLE).map_err(at)?;
        (spec, p, p, p <= target_papr_db, 0)
    } else {
        let o = optimize_phases(num_tones, tone_spacing_hz, target_papr_db, max_iters).map_err(at)?;
        (o.spec, o.papr_db, o.initial_papr_db, o.reached_target, o.iterations)
    };
    let summary = WaveformSummary {
        num_tones,
        tone_spacing_hz,
        bandwidth_hz: spec.bandwidth_hz(),
        duration_s: spec.duration_s(),
        target_papr_db,
        papr_db: papr,
        initial_papr_db: initial,
        reached_target: reached,
        iterations,
    };
    Ok((spec, summary))
}

pub fn write_waveform_csv(path: &Path, spec: &MultitoneSpec) -> Result<(), crate::error::SounderError> {
    let mut t = Table::new(WAVEFORM_COLUMNS)?;
    for (k, (a, p)) in spec.amplitudes.iter().zip(&spec.phases_rad).enumerate() {
        t.row([k.to_string(), num(*a), num(p.rem_euclid(TAU))])?;
    }
    t.save(path)
}
