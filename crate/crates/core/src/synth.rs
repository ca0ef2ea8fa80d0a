//! Ground-truth channel generator.
//!
//! Scenes are drawn from path-loss and delay-spread parameters, then rendered
//! through a Gaussian-main-lobe beam pattern into frequency-response tensors
//! so the analysis chain can be checked against known multipath.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::{Complex32, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::capture::{wrap_azimuth, BeamGrid, LocationMeta, MeasurementCapture, SounderConfig};
use crate::error::{Error, Result};
use crate::math::{cis, exp, from_db, ln, log10, round, sqrt};
use crate::mpc::MultipathComponent;

/// Generator inputs for one location.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SceneSpec {
    /// Path-loss exponent.
    pub n: f64,
    pub p0_db: f64,
    pub shadow_sigma_db: f64,
    /// Target RMS delay spread of the taps, seconds.
    pub ds_target_s: f64,
    pub num_paths: usize,
    pub distance_m: f64,
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.n, self.p0_db, self.shadow_sigma_db, self.ds_target_s, self.distance_m];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scene spec"));
        }
        if self.ds_target_s < 0.0 {
            return Err(Error::InvalidConfig("ds_target_s must be >= 0".into()));
        }
        if self.shadow_sigma_db < 0.0 {
            return Err(Error::InvalidConfig("shadow_sigma_db must be >= 0".into()));
        }
        if !(self.distance_m > 0.0) {
            return Err(Error::InvalidConfig("distance_m must be positive".into()));
        }
        if self.num_paths == 1 && self.ds_target_s > 0.0 {
            return Err(Error::InvalidConfig(
                "a single-path scene has zero delay spread; ds_target_s must be 0".into(),
            ));
        }
        Ok(())
    }
}

/// Azimuth power pattern of one phased-array beam.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BeamPatternModel {
    pub azimuth_3db_deg: f64,
    /// Sidelobe floor relative to the main-lobe peak (negative dB).
    pub sidelobe_floor_db: f64,
}

impl Default for BeamPatternModel {
    fn default() -> Self {
        Self {
            azimuth_3db_deg: 12.0,
            sidelobe_floor_db: -20.0,
        }
    }
}

impl BeamPatternModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.azimuth_3db_deg > 0.0) || !self.azimuth_3db_deg.is_finite() {
            return Err(Error::InvalidConfig("beamwidth must be positive".into()));
        }
        if !(self.sidelobe_floor_db < 0.0) || !self.sidelobe_floor_db.is_finite() {
            return Err(Error::InvalidConfig("sidelobe floor must be negative dB".into()));
        }
        Ok(())
    }
}

/// Linear power gain of a beam `offset_deg` away from boresight.
pub fn beam_gain(pattern: &BeamPatternModel, offset_deg: f64) -> f64 {
    let off = wrap_azimuth(offset_deg);
    let w = pattern.azimuth_3db_deg;
    exp(-4.0 * LN_2 * (off / w) * (off / w)).max(from_db(pattern.sidelobe_floor_db))
}

/// A drawn scene: planted paths and the path loss they were scaled to.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scene {
    pub paths: Vec<MultipathComponent>,
    pub pl_db: f64,
}

const DS_TOLERANCE: f64 = 0.05;
const MAX_REDRAWS: usize = 100;
/// Delays stay inside this fraction of the unambiguous range, clear of the noise-estimation tail.
const MAX_DELAY_FRACTION: f64 = 0.8;

/// Power-weighted RMS delay spread of a set of taps.
pub fn tap_delay_spread(paths: &[MultipathComponent]) -> f64 {
    let total: f64 = paths.iter().map(|p| p.gain).sum();
    if paths.is_empty() || !(total > 0.0) {
        return 0.0;
    }
    let origin = paths.iter().map(|p| p.delay_s).fold(f64::INFINITY, f64::min);
    let (mut m1, mut m2) = (0.0, 0.0);
    for p in paths {
        let t = p.delay_s - origin;
        m1 += p.gain * t / total;
        m2 += p.gain * t * t / total;
    }
    sqrt((m2 - m1 * m1).max(0.0))
}

fn spread_with_decay(delays: &[f64], decay_s: f64) -> f64 {
    let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for &t in delays {
        let p = exp(-t / decay_s);
        w += p;
        m1 += p * t;
        m2 += p * t * t;
    }
    let (m1, m2) = (m1 / w, m2 / w);
    sqrt((m2 - m1 * m1).max(0.0))
}

/// Decay constant giving `target` spread on `delays`, by bisection in log space.
fn solve_decay(delays: &[f64], target: f64, span: f64) -> Option<f64> {
    let (mut lo, mut hi) = (ln(span * 1e-4), ln(span * 1e6));
    if spread_with_decay(delays, exp(hi)) < target {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spread_with_decay(delays, exp(mid)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(exp(0.5 * (lo + hi)))
}

/// Draws paths for one location.
///
/// The total path loss is the distance law plus a Gaussian shadowing draw.
/// The first path sits at zero excess delay and the others are spread
/// uniformly over up to ten target spreads, quantized to delay bins; tap
/// powers follow an exponential decay whose constant is solved so the taps'
/// RMS spread hits `ds_target_s` (redrawn up to 100 times if it cannot get
/// within 5%). Angles are uniform over the grid and the gains sum to the
/// received power implied by the drawn path loss and the link budget.
pub fn sample_scene(spec: &SceneSpec, grid: &BeamGrid, cfg: &SounderConfig) -> Result<Scene> {
    spec.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shadow = Normal::new(0.0, spec.shadow_sigma_db).map_err(|e| Error::InvalidConfig(format!("{e}")))?;
    let pl_db = 10.0 * spec.n * log10(spec.distance_m) + spec.p0_db + shadow.sample(&mut rng);
    let total_gain = from_db(cfg.link_budget_offset_db - pl_db);
    if spec.num_paths == 0 {
        return Ok(Scene { paths: Vec::new(), pl_db });
    }

    let bin = cfg.delay_bin_s();
    let max_delay = MAX_DELAY_FRACTION * cfg.delay_range_s();
    let span = (10.0 * spec.ds_target_s).min(max_delay);
    let mut chosen: Option<(Vec<f64>, Vec<f64>)> = None;
    for _ in 0..MAX_REDRAWS {
        let delays: Vec<f64> = (0..spec.num_paths)
            .map(|i| {
                if i == 0 || spec.ds_target_s == 0.0 {
                    0.0
                } else {
                    round(rng.random::<f64>() * span / bin) * bin
                }
            })
            .collect();
        if spec.ds_target_s == 0.0 {
            chosen = Some((delays, vec![1.0; spec.num_paths]));
            break;
        }
        let Some(decay) = solve_decay(&delays, spec.ds_target_s, span.max(bin)) else {
            continue;
        };
        let ds = spread_with_decay(&delays, decay);
        if (ds - spec.ds_target_s).abs() <= DS_TOLERANCE * spec.ds_target_s {
            let weights = delays.iter().map(|t| exp(-t / decay)).collect();
            chosen = Some((delays, weights));
            break;
        }
    }
    let (delays, weights) = chosen.ok_or_else(|| {
        Error::InvalidConfig(format!(
            "could not reach a {:e} s delay spread with {} paths in {MAX_REDRAWS} draws",
            spec.ds_target_s, spec.num_paths
        ))
    })?;
    let wsum: f64 = weights.iter().sum();
    let paths = delays
        .iter()
        .zip(&weights)
        .map(|(&delay_s, w)| MultipathComponent {
            dod_deg: grid.tx_azimuths_deg()[rng.random_range(0..grid.num_tx())],
            doa_deg: grid.rx_azimuths_deg()[rng.random_range(0..grid.num_rx())],
            delay_s,
            gain: total_gain * w / wsum,
        })
        .collect();
    Ok(Scene { paths, pl_db })
}

/// Forward model in double precision: every beam pair sees
/// sum_p sqrt(gain_p G_tx G_rx) exp(-j 2 pi f tau_p) plus complex Gaussian
/// noise of variance `noise_sigma2` per tone.
///
/// Each beam pair draws its noise from its own ChaCha stream of `seed`, so
/// the result does not depend on evaluation order.
pub fn render_response(
    paths: &[MultipathComponent],
    grid: &BeamGrid,
    cfg: &SounderConfig,
    pattern: &BeamPatternModel,
    noise_sigma2: f64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    pattern.validate()?;
    if !(noise_sigma2 >= 0.0) || !noise_sigma2.is_finite() {
        return Err(Error::InvalidConfig(format!("noise power must be >= 0, got {noise_sigma2}")));
    }
    for p in paths {
        if !(p.delay_s >= 0.0 && p.delay_s < cfg.delay_range_s()) {
            return Err(Error::Range(format!(
                "path delay {:e} s outside the unambiguous range [0, {:e})",
                p.delay_s,
                cfg.delay_range_s()
            )));
        }
        if !(p.gain >= 0.0) || !p.gain.is_finite() {
            return Err(Error::Domain(format!("path gain must be >= 0, got {}", p.gain)));
        }
    }
    let n = cfg.num_tones;
    let ramps: Vec<Vec<Complex64>> = paths
        .iter()
        .map(|p| {
            (0..n)
                .map(|k| cis(-2.0 * PI * (cfg.center_freq_hz + cfg.tone_offset_hz(k)) * p.delay_s))
                .collect()
        })
        .collect();
    let noise = Normal::new(0.0, sqrt(noise_sigma2 / 2.0)).map_err(|e| Error::InvalidConfig(format!("{e}")))?;
    let mut h = vec![Complex64::new(0.0, 0.0); grid.num_pairs() * n];
    for (t, &tx) in grid.tx_azimuths_deg().iter().enumerate() {
        for (r, &rx) in grid.rx_azimuths_deg().iter().enumerate() {
            let pair = t * grid.num_rx() + r;
            let out = &mut h[pair * n..(pair + 1) * n];
            for (p, ramp) in paths.iter().zip(&ramps) {
                let amp = sqrt(p.gain * beam_gain(pattern, tx - p.dod_deg) * beam_gain(pattern, rx - p.doa_deg));
                for (o, v) in out.iter_mut().zip(ramp) {
                    *o += v * amp;
                }
            }
            if noise_sigma2 > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(pair as u64);
                for o in out.iter_mut() {
                    *o += Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng));
                }
            }
        }
    }
    Ok(h)
}

/// [`render_response`] quantized to a single-precision capture.
#[allow(clippy::too_many_arguments)]
pub fn render_capture(
    paths: &[MultipathComponent],
    grid: &BeamGrid,
    cfg: &SounderConfig,
    pattern: &BeamPatternModel,
    noise_sigma2: f64,
    seed: u64,
    meta: LocationMeta,
) -> Result<MeasurementCapture> {
    let h = render_response(paths, grid, cfg, pattern, noise_sigma2, seed)?
        .into_iter()
        .map(|v| Complex32::new(v.re as f32, v.im as f32))
        .collect();
    MeasurementCapture::new(cfg.clone(), grid.clone(), h, meta)
}
