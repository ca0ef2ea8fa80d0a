//! `fit`: path-loss models and log delay-spread statistics per scenario,
//! from one or more `locations.csv` tables.

use std::path::{Path, PathBuf};

use mmw_core::delay::{fit_log_ds, three_gpp_mu, LinkState};
use mmw_core::pathloss::{fit_abg, fit_ci};
use mmw_core::{FitReport, ModelFamily, Scenario};
use serde::Serialize;

use crate::analyze::{read_locations_csv, LocationRow, StageError};
use crate::atomic::create_dir;
use crate::error::SounderError;
use crate::report::{num, opt, save_json, Formats, Table};

pub const MIN_LOCATIONS: usize = 2;

pub const PATHLOSS_COLUMNS: [&str; 10] = [
    "variant",
    "family",
    "scenario",
    "status",
    "n",
    "P0",
    "sigma",
    "ks_p",
    "num_locations",
    "note",
];
pub const DELAY_SPREAD_COLUMNS: [&str; 10] = [
    "scenario",
    "variant",
    "status",
    "median_ns",
    "mu",
    "sigma",
    "ks_p",
    "mu_3gpp",
    "num_locations",
    "note",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Omni,
    Directional,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Omni => "omni",
            Variant::Directional => "directional",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Skipped,
}

/// One path-loss model row.
#[derive(Debug, Clone, Serialize)]
pub struct PathLossRow {
    pub variant: Variant,
    pub family: ModelFamily,
    pub scenario: Scenario,
    pub status: Status,
    pub n: Option<f64>,
    #[serde(rename = "P0")]
    pub p0_db: Option<f64>,
    pub sigma: Option<f64>,
    pub ks_p: Option<f64>,
    pub num_locations: usize,
    pub note: String,
}

/// One delay-spread statistics row; logs are base 10 of seconds.
#[derive(Debug, Clone, Serialize)]
pub struct DelaySpreadRow {
    pub scenario: Scenario,
    pub variant: Variant,
    pub status: Status,
    pub median_ns: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub ks_p: Option<f64>,
    pub mu_3gpp: f64,
    pub num_locations: usize,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThreeGppMu {
    pub los: f64,
    pub nlos: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitOutput {
    pub center_freq_hz: f64,
    pub path_loss: Vec<PathLossRow>,
    pub delay_spread: Vec<DelaySpreadRow>,
    pub three_gpp_mu: ThreeGppMu,
}

fn link_state(s: Scenario) -> LinkState {
    match s {
        Scenario::Street28 => LinkState::Los,
        Scenario::NLoS => LinkState::Nlos,
    }
}

fn pl_samples(rows: &[&LocationRow], v: Variant) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|r| match v {
            Variant::Omni => Some((r.distance_m, r.pl_db)),
            Variant::Directional => r.pl_dir_db.map(|pl| (r.distance_m, pl)),
        })
        .collect()
}

fn ds_samples(rows: &[&LocationRow], v: Variant) -> Vec<f64> {
    rows.iter()
        .filter_map(|r| match v {
            Variant::Omni => Some(r.rms_ds_omni_s),
            Variant::Directional => r.rms_ds_dir_s,
        })
        .collect()
}

fn pl_row(variant: Variant, family: ModelFamily, scenario: Scenario, samples: &[(f64, f64)], f_hz: f64) -> PathLossRow {
    let mut row = PathLossRow {
        variant,
        family,
        scenario,
        status: Status::Skipped,
        n: None,
        p0_db: None,
        sigma: None,
        ks_p: None,
        num_locations: samples.len(),
        note: String::new(),
    };
    if samples.len() < MIN_LOCATIONS {
        row.note = format!("needs at least {MIN_LOCATIONS} locations, have {}", samples.len());
        return row;
    }
    let fit: Result<FitReport, _> = match family {
        ModelFamily::CI => fit_ci(samples, f_hz),
        ModelFamily::ABG => fit_abg(samples),
    };
    match fit {
        Ok(f) => {
            row.status = Status::Ok;
            row.n = Some(f.model.n);
            row.p0_db = Some(f.model.p0_db);
            row.sigma = Some(f.model.sigma_db);
            row.ks_p = f.ks.map(|k| k.p_value);
            if f.ks.is_none() {
                row.note = "KS test needs at least 3 non-degenerate residuals".into();
            }
        }
        Err(e) => row.note = e.to_string(),
    }
    row
}

fn ds_row(variant: Variant, scenario: Scenario, values: &[f64], mu_3gpp: f64) -> DelaySpreadRow {
    let mut row = DelaySpreadRow {
        scenario,
        variant,
        status: Status::Skipped,
        median_ns: None,
        mu: None,
        sigma: None,
        ks_p: None,
        mu_3gpp,
        num_locations: values.len(),
        note: String::new(),
    };
    if values.len() < MIN_LOCATIONS {
        row.note = format!("needs at least {MIN_LOCATIONS} locations, have {}", values.len());
        return row;
    }
    match fit_log_ds(values) {
        Ok(s) => {
            row.status = Status::Ok;
            row.median_ns = Some(s.median_s * 1e9);
            row.mu = Some(s.mu_log);
            row.sigma = Some(s.sigma_log);
            row.ks_p = s.ks_p;
        }
        Err(e) => row.note = e.to_string(),
    }
    row
}

/// Eight path-loss rows (variant x scenario x family) and four delay-spread
/// rows (scenario x variant).
pub fn fit_locations(rows: &[LocationRow], center_freq_hz: f64) -> FitOutput {
    let f_ghz = center_freq_hz / 1e9;
    let mut path_loss = Vec::new();
    let mut delay_spread = Vec::new();
    for variant in [Variant::Omni, Variant::Directional] {
        for scenario in Scenario::ALL {
            let sel: Vec<&LocationRow> = rows.iter().filter(|r| r.scenario == scenario).collect();
            let samples = pl_samples(&sel, variant);
            for family in [ModelFamily::ABG, ModelFamily::CI] {
                path_loss.push(pl_row(variant, family, scenario, &samples, center_freq_hz));
            }
        }
    }
    for scenario in Scenario::ALL {
        let sel: Vec<&LocationRow> = rows.iter().filter(|r| r.scenario == scenario).collect();
        let mu = three_gpp_mu(f_ghz, link_state(scenario));
        for variant in [Variant::Omni, Variant::Directional] {
            delay_spread.push(ds_row(variant, scenario, &ds_samples(&sel, variant), mu));
        }
    }
    FitOutput {
        center_freq_hz,
        path_loss,
        delay_spread,
        three_gpp_mu: ThreeGppMu {
            los: three_gpp_mu(f_ghz, LinkState::Los),
            nlos: three_gpp_mu(f_ghz, LinkState::Nlos),
        },
    }
}

fn status(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Skipped => "skipped",
    }
}

pub fn write_fit_reports(dir: &Path, out: &FitOutput, formats: Formats) -> Result<(), SounderError> {
    create_dir(dir)?;
    if formats.csv {
        let mut t = Table::new(PATHLOSS_COLUMNS)?;
        for r in &out.path_loss {
            t.row([
                r.variant.label().to_string(),
                r.family.label().to_string(),
                r.scenario.label().to_string(),
                status(r.status).to_string(),
                opt(r.n),
                opt(r.p0_db),
                opt(r.sigma),
                opt(r.ks_p),
                r.num_locations.to_string(),
                r.note.clone(),
            ])?;
        }
        t.save(&dir.join("pathloss_fits.csv"))?;
        let mut t = Table::new(DELAY_SPREAD_COLUMNS)?;
        for r in &out.delay_spread {
            t.row([
                r.scenario.label().to_string(),
                r.variant.label().to_string(),
                status(r.status).to_string(),
                opt(r.median_ns),
                opt(r.mu),
                opt(r.sigma),
                opt(r.ks_p),
                num(r.mu_3gpp),
                r.num_locations.to_string(),
                r.note.clone(),
            ])?;
        }
        t.save(&dir.join("delay_spread_stats.csv"))?;
    }
    if formats.json {
        save_json(&dir.join("fits.json"), out)?;
    }
    Ok(())
}

pub fn run_fit(inputs: &[PathBuf], center_freq_hz: f64, out_dir: &Path, formats: Formats) -> Result<FitOutput, StageError> {
    if inputs.is_empty() {
        return Err(StageError::new("input", SounderError::Config("no locations tables given".into())));
    }
    if !(center_freq_hz > 0.0 && center_freq_hz.is_finite()) {
        return Err(StageError::new(
            "input",
            SounderError::Config(format!("center frequency must be positive, got {center_freq_hz}")),
        ));
    }
    let mut rows = Vec::new();
    for p in inputs {
        rows.extend(read_locations_csv(p).map_err(|e| StageError::new("load", e))?);
    }
    if rows.is_empty() {
        return Err(StageError::new("load", SounderError::Config("locations tables hold no rows".into())));
    }
    let out = fit_locations(&rows, center_freq_hz);
    write_fit_reports(out_dir, &out, formats).map_err(|e| StageError::new("report", e))?;
    Ok(out)
}
