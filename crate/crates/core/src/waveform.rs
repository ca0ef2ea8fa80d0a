//! Equally spaced multitone sounding waveforms: synthesis, PAPR, and
//! phase-only crest-factor reduction by iterative clip-and-restore.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::math::{log10, powi10, rem_euclid, sqrt};

/// Minimum oversampling accepted for PAPR measurement.
pub const MIN_PAPR_OVERSAMPLE: usize = 4;

/// Envelope clip level of the phase optimizer relative to the mean amplitude.
/// Clipping at the target PAPR itself stalls well above it.
pub const DEFAULT_CLIP_DB: f64 = 0.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MultitoneSpec {
    pub num_tones: usize,
    pub tone_spacing_hz: f64,
    pub phases_rad: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

impl MultitoneSpec {
    pub fn new(tone_spacing_hz: f64, phases_rad: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        let spec = Self {
            num_tones: phases_rad.len(),
            tone_spacing_hz,
            phases_rad,
            amplitudes,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_phases(tone_spacing_hz: f64, phases_rad: Vec<f64>) -> Result<Self> {
        let n = phases_rad.len();
        Self::new(tone_spacing_hz, phases_rad, vec![1.0; n])
    }

    /// All tones in phase: the worst-case coherent peak.
    pub fn zero_phase(num_tones: usize, tone_spacing_hz: f64) -> Result<Self> {
        Self::with_phases(tone_spacing_hz, vec![0.0; num_tones])
    }

    /// Newman phases pi k^2 / N for tone k = 0..N-1.
    pub fn newman(num_tones: usize, tone_spacing_hz: f64) -> Result<Self> {
        let n = num_tones as f64;
        let phases = (0..num_tones)
            .map(|k| {
                let k = k as f64;
                rem_euclid(PI * k * k / n, 2.0 * PI)
            })
            .collect();
        Self::with_phases(tone_spacing_hz, phases)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_tones == 0 {
            return Err(Error::InvalidConfig("multitone needs at least one tone".into()));
        }
        if self.phases_rad.len() != self.num_tones || self.amplitudes.len() != self.num_tones {
            return Err(Error::Dimension(format!(
                "{} tones but {} phases and {} amplitudes",
                self.num_tones,
                self.phases_rad.len(),
                self.amplitudes.len()
            )));
        }
        if !(self.tone_spacing_hz > 0.0 && self.tone_spacing_hz.is_finite()) {
            return Err(Error::InvalidConfig("tone spacing must be positive".into()));
        }
        if self.phases_rad.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("tone phases"));
        }
        if self.amplitudes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::Domain("tone amplitudes must be positive".into()));
        }
        Ok(())
    }

    /// One waveform period, 1 / spacing.
    pub fn duration_s(&self) -> f64 {
        1.0 / self.tone_spacing_hz
    }

    pub fn bandwidth_hz(&self) -> f64 {
        (self.num_tones - 1) as f64 * self.tone_spacing_hz
    }

    fn tone_coefficients(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.amplitudes
            .iter()
            .zip(&self.phases_rad)
            .map(|(a, p)| Complex64::from_polar(*a, *p))
    }
}

/// Writes the tone coefficients into bins 0..N-1 of an `m`-point buffer and
/// returns sum_k c_k exp(j 2 pi k i / m) / sqrt(N).
fn time_samples(spec: &MultitoneSpec, fft: &Fft) -> Vec<Complex64> {
    let m = fft.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (b, c) in buf.iter_mut().zip(spec.tone_coefficients()) {
        *b = c;
    }
    fft.inverse(&mut buf);
    let scale = 1.0 / sqrt(spec.num_tones as f64);
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// One period of complex baseband samples at `oversample x N x spacing`.
///
/// Samples are scaled by 1/sqrt(N), so their mean power is sum a_k^2 / N.
pub fn synthesize_time_domain(spec: &MultitoneSpec, oversample: usize) -> Result<Vec<Complex64>> {
    spec.validate()?;
    if oversample == 0 {
        return Err(Error::InvalidConfig("oversample must be at least 1".into()));
    }
    Ok(time_samples(spec, &Fft::new(oversample * spec.num_tones)))
}

fn papr_of(samples: &[Complex64]) -> f64 {
    let (mut peak, mut total) = (0.0f64, 0.0);
    for v in samples {
        let p = v.norm_sqr();
        peak = peak.max(p);
        total += p;
    }
    10.0 * log10(peak * samples.len() as f64 / total)
}

/// 10 log10(max |x|^2 / mean |x|^2) on an `oversample`-times oversampled period.
pub fn papr_db(spec: &MultitoneSpec, oversample: usize) -> Result<f64> {
    if oversample < MIN_PAPR_OVERSAMPLE {
        return Err(Error::InvalidConfig(format!(
            "PAPR measurement needs oversample >= {MIN_PAPR_OVERSAMPLE}, got {oversample}"
        )));
    }
    Ok(papr_of(&synthesize_time_domain(spec, oversample)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOptimization {
    pub spec: MultitoneSpec,
    /// PAPR of `spec` at [`MIN_PAPR_OVERSAMPLE`].
    pub papr_db: f64,
    pub initial_papr_db: f64,
    pub reached_target: bool,
    pub iterations: usize,
}

/// Low-PAPR phases for `num_tones` unit tones, starting from Newman phases.
pub fn optimize_phases(num_tones: usize, tone_spacing_hz: f64, target_papr_db: f64, max_iters: usize) -> Result<PhaseOptimization> {
    if num_tones < 2 {
        return Err(Error::InvalidConfig(format!("phase optimization needs >= 2 tones, got {num_tones}")));
    }
    refine_phases(&MultitoneSpec::newman(num_tones, tone_spacing_hz)?, target_papr_db, max_iters)
}

/// Clip-and-restore iterations from `initial`.
///
/// Each pass synthesizes the oversampled period, limits the envelope to its
/// mean amplitude, transforms back, and keeps only the new tone phases
/// (magnitudes are restored). Iteration stops once the target is met. The best spec seen is
/// returned, so the result never has a higher PAPR than `initial`; an
/// initial spec already at or below target is returned untouched.
pub fn refine_phases(initial: &MultitoneSpec, target_papr_db: f64, max_iters: usize) -> Result<PhaseOptimization> {
    refine_phases_with(initial, target_papr_db, DEFAULT_CLIP_DB, max_iters)
}

/// [`refine_phases`] with an explicit clip level, in dB relative to the mean
/// envelope amplitude.
pub fn refine_phases_with(initial: &MultitoneSpec, target_papr_db: f64, clip_db: f64, max_iters: usize) -> Result<PhaseOptimization> {
    initial.validate()?;
    let initial_papr = papr_db(initial, MIN_PAPR_OVERSAMPLE)?;
    let mut best = PhaseOptimization {
        spec: initial.clone(),
        papr_db: initial_papr,
        initial_papr_db: initial_papr,
        reached_target: initial_papr <= target_papr_db,
        iterations: 0,
    };
    if best.reached_target || initial.num_tones < 2 {
        return Ok(best);
    }

    let n = initial.num_tones;
    // Power-of-two working grid at least as fine as the measurement grid.
    let m = (MIN_PAPR_OVERSAMPLE * n).next_power_of_two();
    let fft = Fft::new(m);
    let measure = Fft::new(MIN_PAPR_OVERSAMPLE * n);
    let clip_ratio = powi10(clip_db / 20.0);
    let mut current = initial.clone();
    for it in 1..=max_iters {
        let mut x = time_samples(&current, &fft);
        let mean_amp = x.iter().map(|v| v.norm()).sum::<f64>() / m as f64;
        let limit = mean_amp * clip_ratio;
        for v in x.iter_mut() {
            let a = v.norm();
            if a > limit {
                *v *= limit / a;
            }
        }
        fft.forward(&mut x);
        for (k, phase) in current.phases_rad.iter_mut().enumerate() {
            let c = x[k];
            if c.norm_sqr() > 0.0 {
                *phase = rem_euclid(c.arg(), 2.0 * PI);
            }
        }
        let papr = papr_of(&time_samples(&current, &measure));
        if papr < best.papr_db {
            best.spec = current.clone();
            best.papr_db = papr;
            best.iterations = it;
            if papr <= target_papr_db {
                best.reached_target = true;
                break;
            }
        }
    }
    Ok(best)
}
