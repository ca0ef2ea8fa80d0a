//! `synth`: scene JSON in, capture file and planted truth out.

use std::path::Path;

use mmw_core::synth::{render_capture, sample_scene, BeamPatternModel, SceneSpec};
use mmw_core::{BeamGrid, CalibrationProfile, LocationMeta, MeasurementCapture, MultipathComponent, Scenario, SounderConfig};
use serde::{Deserialize, Serialize};

use crate::analyze::StageError;
use crate::error::SounderError;
use crate::format::{save_calibration, save_capture};

/// Inclusive azimuth spans of the rendered grid, degrees.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpans {
    pub tx: (f64, f64),
    pub rx: (f64, f64),
}

/// Scene file: the generator parameters plus rendering context.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub n: f64,
    pub p0_db: f64,
    pub shadow_sigma_db: f64,
    pub ds_target_s: f64,
    pub num_paths: usize,
    pub distance_m: f64,
    pub seed: u64,
    #[serde(default)]
    pub location_id: Option<String>,
    #[serde(default = "default_scenario")]
    pub scenario: Scenario,
    /// Defaults to the full 19 x 72 grid.
    #[serde(default)]
    pub grid: Option<GridSpans>,
    #[serde(default)]
    pub config: Option<SounderConfig>,
    #[serde(default)]
    pub pattern: Option<BeamPatternModel>,
    /// Complex noise variance per tone. Exclusive with `snr_db`.
    #[serde(default)]
    pub noise_sigma2: Option<f64>,
    /// Total path power over per-tone noise variance, dB.
    #[serde(default)]
    pub snr_db: Option<f64>,
}

fn default_scenario() -> Scenario {
    Scenario::NLoS
}

#[derive(Debug, Clone, Serialize)]
pub struct Truth {
    pub location_id: String,
    pub scenario: Scenario,
    pub distance_m: f64,
    pub pl_db: f64,
    pub noise_sigma2: f64,
    pub spec: SceneSpec,
    pub paths: Vec<MultipathComponent>,
}

impl SceneFile {
    pub fn spec(&self) -> SceneSpec {
        SceneSpec {
            n: self.n,
            p0_db: self.p0_db,
            shadow_sigma_db: self.shadow_sigma_db,
            ds_target_s: self.ds_target_s,
            num_paths: self.num_paths,
            distance_m: self.distance_m,
            seed: self.seed,
        }
    }
}

pub fn parse_scene(text: &str) -> Result<SceneFile, SounderError> {
    serde_json::from_str(text).map_err(|e| SounderError::Config(format!("scene file: {e}")))
}

/// Samples and renders the scene.
pub fn synthesize(scene: &SceneFile) -> Result<(MeasurementCapture, Truth), StageError> {
    let cfg = scene.config.clone().unwrap_or_default();
    let grid = match &scene.grid {
        Some(g) => BeamGrid::from_spans(g.tx, g.rx),
        None => Ok(BeamGrid::standard()),
    }
    .map_err(|e| StageError::new("scene", e))?;
    let pattern = scene.pattern.unwrap_or_default();
    let spec = scene.spec();
    let sampled = sample_scene(&spec, &grid, &cfg).map_err(|e| StageError::new("sample", e))?;
    let total: f64 = sampled.paths.iter().map(|p| p.gain).sum();
    let noise_sigma2 = match (scene.noise_sigma2, scene.snr_db) {
        (Some(_), Some(_)) => {
            return Err(StageError::new(
                "scene",
                SounderError::Config("give either noise_sigma2 or snr_db, not both".into()),
            ))
        }
        (Some(v), None) => v,
        (None, Some(snr)) => total / mmw_core::math::from_db(snr),
        (None, None) => 0.0,
    };
    let location_id = scene.location_id.clone().unwrap_or_else(|| format!("synth-{}", scene.seed));
    let meta = LocationMeta::new(location_id.clone(), scene.distance_m, scene.scenario);
    let capture = render_capture(&sampled.paths, &grid, &cfg, &pattern, noise_sigma2, scene.seed, meta)
        .map_err(|e| StageError::new("render", e))?;
    let truth = Truth {
        location_id,
        scenario: scene.scenario,
        distance_m: scene.distance_m,
        pl_db: sampled.pl_db,
        noise_sigma2,
        spec,
        paths: sampled.paths,
    };
    Ok((capture, truth))
}

pub fn run_synth(
    scene_path: &Path,
    out: &Path,
    truth_out: Option<&Path>,
    calibration_out: Option<&Path>,
) -> Result<Truth, StageError> {
    let text = std::fs::read_to_string(scene_path).map_err(|e| StageError::new("scene", SounderError::io(scene_path, e)))?;
    let scene = parse_scene(&text).map_err(|e| StageError::new("scene", e))?;
    let (capture, truth) = synthesize(&scene)?;
    save_capture(out, &capture).map_err(|e| StageError::new("write", e))?;
    if let Some(p) = truth_out {
        crate::report::save_json(p, &truth).map_err(|e| StageError::new("write", e))?;
    }
    if let Some(p) = calibration_out {
        save_calibration(p, &CalibrationProfile::unit(capture.config().num_tones))
            .map_err(|e| StageError::new("write", e))?;
    }
    Ok(truth)
}
