//! CSV and JSON report writers. Column orders here are the documented
//! schema; change them only together with the README.

use std::path::Path;

use mmw_core::beam::{AngularSpectrum, Padp, PadpSide};
use mmw_core::{DelayProfile, MultipathComponent};
use serde::Serialize;

use crate::atomic::write_atomic;
use crate::error::{Result, SounderError};

pub const LOCATION_COLUMNS: [&str; 7] = [
    "location_id",
    "scenario",
    "distance_m",
    "pl_db",
    "rms_ds_omni_s",
    "rms_ds_dir_s",
    "pl_dir_db",
];
pub const MPC_COLUMNS: [&str; 4] = ["dod_deg", "doa_deg", "delay_ns", "gain_db"];
pub const WAVEFORM_COLUMNS: [&str; 3] = ["tone_index", "amplitude", "phase_rad"];

/// Which report encodings to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats { csv: true, json: true }
    }
}

impl Formats {
    pub fn parse(list: &[String]) -> Result<Self> {
        let mut f = Formats { csv: false, json: false };
        for item in list {
            match item.trim().to_ascii_lowercase().as_str() {
                "csv" => f.csv = true,
                "json" => f.json = true,
                other => return Err(SounderError::Config(format!("unknown report format {other:?}"))),
            }
        }
        if !f.csv && !f.json {
            return Err(SounderError::Config("at least one report format is required".into()));
        }
        Ok(f)
    }
}

pub(crate) struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(csv_error)?;
        Ok(Table { w })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).map_err(csv_error)
    }

    pub fn save(self, path: &Path) -> Result<()> {
        let bytes = self.w.into_inner().map_err(|e| SounderError::Format(e.to_string()))?;
        write_atomic(path, &bytes)
    }
}

fn csv_error(e: csv::Error) -> SounderError {
    SounderError::Format(format!("csv: {e}"))
}

pub fn save_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| SounderError::Format(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Shortest round-trip rendering, so CSVs are stable across runs.
pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn delay_ns(bin: usize, bin_s: f64) -> String {
    num(bin as f64 * bin_s * 1e9)
}

/// `bin, delay_ns` then one column per profile.
pub fn write_pdps(path: &Path, names: &[&str], profiles: &[&DelayProfile]) -> Result<()> {
    let mut header = vec!["bin", "delay_ns"];
    header.extend_from_slice(names);
    let mut t = Table::new(header)?;
    let first = profiles.first().ok_or_else(|| SounderError::Dimension("no profiles to write".into()))?;
    for k in 0..first.len() {
        let mut row = vec![k.to_string(), delay_ns(k, first.delay_bin_s())];
        row.extend(profiles.iter().map(|p| num(p.power()[k])));
        t.row(row)?;
    }
    t.save(path)
}

/// Rows are TX azimuths, columns RX azimuths, linear power.
pub fn write_pas(path: &Path, pas: &AngularSpectrum) -> Result<()> {
    let g = pas.grid();
    let mut header = vec!["tx_deg\\rx_deg".to_string()];
    header.extend(g.rx_azimuths_deg().iter().map(|a| num(*a)));
    let mut t = Table::new(header)?;
    for (i, tx) in g.tx_azimuths_deg().iter().enumerate() {
        let mut row = vec![num(*tx)];
        row.extend((0..g.num_rx()).map(|j| num(pas.at(i, j))));
        t.row(row)?;
    }
    t.save(path)
}

/// Rows are beams of one side, columns delay bins (header in ns).
pub fn write_padp(path: &Path, padp: &Padp, beams_deg: &[f64], bin_s: f64) -> Result<()> {
    let label = match padp.side() {
        PadpSide::RxSide => "rx_deg\\delay_ns",
        PadpSide::TxSide => "tx_deg\\delay_ns",
    };
    let mut header = vec![label.to_string()];
    header.extend((0..padp.num_bins()).map(|k| delay_ns(k, bin_s)));
    let mut t = Table::new(header)?;
    for (i, deg) in beams_deg.iter().enumerate() {
        let mut row = vec![num(*deg)];
        row.extend(padp.beam(i).iter().map(|v| num(*v)));
        t.row(row)?;
    }
    t.save(path)
}

pub fn write_mpcs(path: &Path, mpcs: &[MultipathComponent]) -> Result<()> {
    let mut t = Table::new(MPC_COLUMNS)?;
    for m in mpcs {
        t.row([
            num(m.dod_deg),
            num(m.doa_deg),
            num(m.delay_s * 1e9),
            num(mmw_core::math::to_db(m.gain)),
        ])?;
    }
    t.save(path)
}
