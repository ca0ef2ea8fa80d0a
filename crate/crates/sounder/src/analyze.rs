//! `analyze`: captures in, per-location PDP/PAS/PADP/MPC reports and the
//! locations table out.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use mmw_core::beam::{
    angular_power_spectrum, best_beam_pair, best_beam_pdp, omni_pdp, padp, path_loss_db, received_power, DelayOptions,
    PadpSide,
};
use mmw_core::capture::merge_sector_captures;
use mmw_core::delay::{gate_all, rms_delay_spread, support_above, NoiseEstimate};
use mmw_core::mpc::mpcs_from_gated;
use mmw_core::{CalibrationProfile, DirectionalPdps, MeasurementCapture, MultipathComponent, Scenario};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atomic::create_dir;
use crate::config::RunConfig;
use crate::error::SounderError;
use crate::format::{load_calibration, load_capture};
use crate::report::{num, save_json, write_mpcs, write_padp, write_pas, write_pdps, Table, LOCATION_COLUMNS};

/// A failure tagged with the pipeline stage that produced it.
#[derive(Debug)]
pub struct StageError {
    pub stage: String,
    pub source: SounderError,
}

impl StageError {
    pub fn new(stage: impl Into<String>, source: impl Into<SounderError>) -> Self {
        StageError {
            stage: stage.into(),
            source: source.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.source.exit_code()
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

/// One row of `locations.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationRow {
    pub location_id: String,
    pub scenario: Scenario,
    pub distance_m: f64,
    pub pl_db: f64,
    pub rms_ds_omni_s: f64,
    #[serde(default)]
    pub rms_ds_dir_s: Option<f64>,
    #[serde(default)]
    pub pl_dir_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocationSummary {
    #[serde(flatten)]
    pub row: LocationRow,
    pub p_rx: f64,
    pub p_rx_dir: f64,
    /// (TX, RX) azimuths of the strongest beam pair, degrees.
    pub best_beam_deg: (f64, f64),
    pub noise_omni: f64,
    pub num_mpcs: usize,
    pub mpcs: Vec<MultipathComponent>,
}

/// Runs the analysis chain on one (possibly merged) capture.
pub fn analyze_capture(
    c: &MeasurementCapture,
    cal: &CalibrationProfile,
    rc: &RunConfig,
) -> Result<(LocationSummary, Products), StageError> {
    let id = &c.meta().location_id;
    let at = |stage: &str| format!("{stage} [{id}]");
    let opts = DelayOptions { window: rc.window };
    let pdps = DirectionalPdps::compute_with(c, cal, opts).map_err(|e| StageError::new(at("pdp"), e))?;
    let noise = NoiseEstimate::from_tail(&pdps, rc.tail_fraction).map_err(|e| StageError::new(at("noise"), e))?;
    let gated = gate_all(&pdps, &noise, rc.directional_gate_factor);

    let omni = omni_pdp(&gated);
    let p_rx = received_power(&omni);
    let pl_db = path_loss_db(p_rx, c.config()).map_err(|e| StageError::new(at("pathloss"), e))?;
    let support = support_above(&omni, rc.support_factor * noise.omni());
    let rms_ds_omni_s = rms_delay_spread(&omni, &support).map_err(|e| StageError::new(at("delay-spread"), e))?;

    let pas = angular_power_spectrum(&pdps);
    let best = best_beam_pair(&pas);
    let best_pdp = best_beam_pdp(&gated, best).map_err(|e| StageError::new(at("best-beam"), e))?;
    let (bt, br) = (
        c.grid().tx_index(best.0).map_err(|e| StageError::new(at("best-beam"), e))?,
        c.grid().rx_index(best.1).map_err(|e| StageError::new(at("best-beam"), e))?,
    );
    let p_rx_dir = received_power(&best_pdp);
    // A best pair whose bins were all gated away has no directional figures.
    let pl_dir_db = path_loss_db(p_rx_dir, c.config()).ok();
    let dir_support = support_above(&best_pdp, rc.support_factor * noise.pair(bt, br));
    let rms_ds_dir_s = rms_delay_spread(&best_pdp, &dir_support).ok();

    let mpcs = mpcs_from_gated(&gated);
    let scenario = rc.scenario.unwrap_or(c.meta().scenario);
    let summary = LocationSummary {
        row: LocationRow {
            location_id: id.clone(),
            scenario,
            distance_m: c.meta().tx_rx_distance_m,
            pl_db,
            rms_ds_omni_s,
            rms_ds_dir_s,
            pl_dir_db,
        },
        p_rx,
        p_rx_dir,
        best_beam_deg: best,
        noise_omni: noise.omni(),
        num_mpcs: mpcs.len(),
        mpcs,
    };
    let products = Products {
        omni_raw: omni_pdp(&pdps),
        omni,
        best_raw: best_beam_pdp(&pdps, best).map_err(|e| StageError::new(at("best-beam"), e))?,
        best: best_pdp,
        pas,
        pdps: gated,
    };
    Ok((summary, products))
}

/// Matrices behind a location summary.
pub struct Products {
    pub omni_raw: mmw_core::DelayProfile,
    pub omni: mmw_core::DelayProfile,
    pub best_raw: mmw_core::DelayProfile,
    pub best: mmw_core::DelayProfile,
    pub pas: mmw_core::beam::AngularSpectrum,
    /// Gated directional PDPs.
    pub pdps: DirectionalPdps,
}

/// Directory-safe form of a location id.
pub fn location_dir_name(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with('.') {
        format!("_{s}")
    } else {
        s
    }
}

fn write_location(dir: &Path, s: &LocationSummary, p: &Products, rc: &RunConfig) -> Result<(), SounderError> {
    create_dir(dir)?;
    if rc.formats.csv {
        write_pdps(
            &dir.join("pdp.csv"),
            &["omni", "omni_gated", "best_beam", "best_beam_gated"],
            &[&p.omni_raw, &p.omni, &p.best_raw, &p.best],
        )?;
        write_pas(&dir.join("pas.csv"), &p.pas)?;
        let g = p.pdps.grid();
        let bin = p.pdps.delay_bin_s();
        write_padp(&dir.join("padp_rx.csv"), &padp(&p.pdps, PadpSide::RxSide), g.rx_azimuths_deg(), bin)?;
        write_padp(&dir.join("padp_tx.csv"), &padp(&p.pdps, PadpSide::TxSide), g.tx_azimuths_deg(), bin)?;
        write_mpcs(&dir.join("mpcs.csv"), &s.mpcs)?;
    }
    if rc.formats.json {
        save_json(&dir.join("summary.json"), s)?;
    }
    Ok(())
}

pub fn write_locations_csv(path: &Path, rows: &[LocationRow]) -> Result<(), SounderError> {
    let mut t = Table::new(LOCATION_COLUMNS)?;
    for r in rows {
        t.row([
            r.location_id.clone(),
            r.scenario.label().to_string(),
            num(r.distance_m),
            num(r.pl_db),
            num(r.rms_ds_omni_s),
            crate::report::opt(r.rms_ds_dir_s),
            crate::report::opt(r.pl_dir_db),
        ])?;
    }
    t.save(path)
}

pub fn read_locations_csv(path: &Path) -> Result<Vec<LocationRow>, SounderError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => SounderError::io(path, io),
        other => SounderError::Format(format!("{}: {other:?}", path.display())),
    })?;
    rd.deserialize()
        .map(|r| r.map_err(|e| SounderError::Format(format!("{}: {e}", path.display()))))
        .collect()
}

/// Loads inputs and merges files that share a location id as RX sectors.
pub fn load_locations(inputs: &[PathBuf]) -> Result<Vec<MeasurementCapture>, StageError> {
    let loaded: Vec<MeasurementCapture> = inputs
        .par_iter()
        .map(|p| load_capture(p).map_err(|e| StageError::new("load", e)))
        .collect::<Result<_, _>>()?;
    let mut groups: BTreeMap<String, Vec<MeasurementCapture>> = BTreeMap::new();
    for c in loaded {
        groups.entry(c.meta().location_id.clone()).or_default().push(c);
    }
    groups
        .into_iter()
        .map(|(id, mut caps)| {
            if caps.len() == 1 {
                return Ok(caps.pop().expect("one capture"));
            }
            let sectors = caps
                .into_iter()
                .map(|c| match c.meta().rx_orientation_set.as_slice() {
                    [rot] => Ok((*rot, c)),
                    other => Err(StageError::new(
                        format!("merge [{id}]"),
                        SounderError::Config(format!(
                            "several files share location {id}, but one carries rotations {other:?}; sector files need exactly one"
                        )),
                    )),
                })
                .collect::<Result<Vec<_>, _>>()?;
            merge_sector_captures(&sectors).map_err(|e| StageError::new(format!("merge [{id}]"), e))
        })
        .collect()
}

/// Full `analyze` run; returns the location rows in id order.
pub fn run_analyze(rc: &RunConfig) -> Result<Vec<LocationSummary>, StageError> {
    let cal = load_calibration(&rc.calibration).map_err(|e| StageError::new("calibration", e))?;
    let captures = load_locations(&rc.inputs)?;
    let mut dirs: BTreeMap<String, &str> = BTreeMap::new();
    for c in &captures {
        let id = c.meta().location_id.as_str();
        if let Some(prev) = dirs.insert(location_dir_name(id), id) {
            return Err(StageError::new(
                "output",
                SounderError::Config(format!("location ids {prev:?} and {id:?} map to the same report directory")),
            ));
        }
    }
    create_dir(&rc.output_dir).map_err(|e| StageError::new("output", e))?;
    let summaries: Vec<LocationSummary> = captures
        .par_iter()
        .map(|c| {
            let (s, p) = analyze_capture(c, &cal, rc)?;
            let dir = rc.output_dir.join(location_dir_name(&s.row.location_id));
            write_location(&dir, &s, &p, rc).map_err(|e| StageError::new(format!("report [{}]", s.row.location_id), e))?;
            Ok(s)
        })
        .collect::<Result<_, StageError>>()?;
    let rows: Vec<LocationRow> = summaries.iter().map(|s| s.row.clone()).collect();
    if rc.formats.csv {
        write_locations_csv(&rc.output_dir.join("locations.csv"), &rows).map_err(|e| StageError::new("report", e))?;
    }
    if rc.formats.json {
        save_json(&rc.output_dir.join("locations.json"), &rows).map_err(|e| StageError::new("report", e))?;
    }
    Ok(summaries)
}
