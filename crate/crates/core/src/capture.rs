//! Measurement data model: beam grids, sounder configuration, frequency
//! response tensors, calibration responses, and location metadata.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex32;

use crate::error::{Error, Result};
use crate::math::{rem_euclid, round};

/// Beam steering step of the phased arrays, in degrees.
pub const GRID_STEP_DEG: f64 = 5.0;

const ANGLE_TOL: f64 = 1e-9;

/// Wraps an azimuth into the half-open interval (-180, 180].
pub fn wrap_azimuth(deg: f64) -> f64 {
    let r = rem_euclid(deg + 180.0, 360.0) - 180.0;
    if r <= -180.0 + ANGLE_TOL {
        180.0
    } else {
        r
    }
}

fn on_step(deg: f64) -> bool {
    let q = deg / GRID_STEP_DEG;
    (q - round(q)).abs() < ANGLE_TOL
}

fn find_angle(list: &[f64], deg: f64) -> Option<usize> {
    list.iter().position(|a| (a - deg).abs() < ANGLE_TOL)
}

/// TX and RX azimuth grids of a beam sweep.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawBeamGrid"))]
pub struct BeamGrid {
    tx_azimuths_deg: Vec<f64>,
    rx_azimuths_deg: Vec<f64>,
    elevation_deg: f64,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct RawBeamGrid {
    tx_azimuths_deg: Vec<f64>,
    rx_azimuths_deg: Vec<f64>,
    elevation_deg: f64,
}

#[cfg(feature = "serde")]
impl TryFrom<RawBeamGrid> for BeamGrid {
    type Error = Error;

    fn try_from(raw: RawBeamGrid) -> Result<Self> {
        BeamGrid::new(raw.tx_azimuths_deg, raw.rx_azimuths_deg, raw.elevation_deg)
    }
}

impl BeamGrid {
    /// Validates and builds a grid.
    ///
    /// Both lists must be non-empty, strictly increasing, and made of multiples
    /// of [`GRID_STEP_DEG`]. TX angles must lie in [-45, 45]; RX angles in
    /// (-180, 180]. Gaps are allowed (a merge of fewer than four sectors
    /// leaves them); use [`BeamGrid::rx_is_uniform`] to check for them.
    pub fn new(tx_azimuths_deg: Vec<f64>, rx_azimuths_deg: Vec<f64>, elevation_deg: f64) -> Result<Self> {
        check_axis("tx", &tx_azimuths_deg, -45.0, 45.0)?;
        check_axis("rx", &rx_azimuths_deg, -180.0 + GRID_STEP_DEG, 180.0)?;
        if !elevation_deg.is_finite() {
            return Err(Error::NonFinite("elevation"));
        }
        Ok(Self {
            tx_azimuths_deg,
            rx_azimuths_deg,
            elevation_deg,
        })
    }

    /// Builds a grid from inclusive angle ranges on the 5 degree step.
    pub fn from_spans(tx: (f64, f64), rx: (f64, f64)) -> Result<Self> {
        Self::new(span(tx.0, tx.1), span(rx.0, rx.1), 0.0)
    }

    /// The campaign grid: 19 TX beams over [-45, 45] and 72 RX azimuths over [-175, 180].
    pub fn standard() -> Self {
        Self::from_spans((-45.0, 45.0), (-175.0, 180.0)).expect("standard grid is valid")
    }

    /// One un-rotated RX sector: 19 TX beams by 19 RX beams over [-45, 45].
    pub fn sector() -> Self {
        Self::from_spans((-45.0, 45.0), (-45.0, 45.0)).expect("sector grid is valid")
    }

    pub fn tx_azimuths_deg(&self) -> &[f64] {
        &self.tx_azimuths_deg
    }

    pub fn rx_azimuths_deg(&self) -> &[f64] {
        &self.rx_azimuths_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    pub fn num_tx(&self) -> usize {
        self.tx_azimuths_deg.len()
    }

    pub fn num_rx(&self) -> usize {
        self.rx_azimuths_deg.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.num_tx() * self.num_rx()
    }

    pub fn tx_index(&self, deg: f64) -> Result<usize> {
        find_angle(&self.tx_azimuths_deg, deg).ok_or(Error::OffGrid(deg))
    }

    pub fn rx_index(&self, deg: f64) -> Result<usize> {
        find_angle(&self.rx_azimuths_deg, wrap_azimuth(deg)).ok_or(Error::OffGrid(deg))
    }

    /// True when consecutive RX angles are exactly one grid step apart.
    pub fn rx_is_uniform(&self) -> bool {
        self.rx_azimuths_deg
            .windows(2)
            .all(|w| (w[1] - w[0] - GRID_STEP_DEG).abs() < ANGLE_TOL)
    }

    /// True when the RX grid is uniform and closes the full circle, so the
    /// first and last azimuths are neighbours.
    pub fn rx_wraps(&self) -> bool {
        self.rx_is_uniform() && (self.num_rx() as f64 * GRID_STEP_DEG - 360.0).abs() < ANGLE_TOL
    }
}

fn span(lo: f64, hi: f64) -> Vec<f64> {
    let steps = round((hi - lo) / GRID_STEP_DEG);
    if steps < 0.0 {
        return Vec::new();
    }
    (0..=steps as usize).map(|i| lo + i as f64 * GRID_STEP_DEG).collect()
}

fn check_axis(name: &str, angles: &[f64], lo: f64, hi: f64) -> Result<()> {
    if angles.is_empty() {
        return Err(Error::Dimension(format!("{name} azimuth grid is empty")));
    }
    for &a in angles {
        if !a.is_finite() {
            return Err(Error::NonFinite("beam grid"));
        }
        if !on_step(a) {
            return Err(Error::Grid(format!("{name} azimuth {a} is not a multiple of {GRID_STEP_DEG}")));
        }
        if a < lo - ANGLE_TOL || a > hi + ANGLE_TOL {
            return Err(Error::Grid(format!("{name} azimuth {a} outside [{lo}, {hi}]")));
        }
    }
    if angles.windows(2).any(|w| w[1] <= w[0] + ANGLE_TOL) {
        return Err(Error::Grid(format!("{name} azimuths must be strictly increasing")));
    }
    Ok(())
}

/// Sounder and link-budget parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SounderConfig {
    pub center_freq_hz: f64,
    pub num_tones: usize,
    pub tone_spacing_hz: f64,
    pub tx_eirp_dbm: f64,
    /// EIRP plus RX antenna and processing gains; path loss is this offset
    /// minus the received power in dB.
    pub link_budget_offset_db: f64,
}

impl Default for SounderConfig {
    fn default() -> Self {
        Self {
            center_freq_hz: 27.85e9,
            num_tones: 801,
            tone_spacing_hz: 500e3,
            tx_eirp_dbm: 57.0,
            link_budget_offset_db: 100.0,
        }
    }
}

impl SounderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_tones < 2 {
            return Err(Error::InvalidConfig(format!("num_tones must be >= 2, got {}", self.num_tones)));
        }
        if !(self.tone_spacing_hz > 0.0 && self.tone_spacing_hz.is_finite()) {
            return Err(Error::InvalidConfig("tone_spacing_hz must be positive".into()));
        }
        if !(self.center_freq_hz > 0.0 && self.center_freq_hz.is_finite()) {
            return Err(Error::InvalidConfig("center_freq_hz must be positive".into()));
        }
        if !self.tx_eirp_dbm.is_finite() || !self.link_budget_offset_db.is_finite() {
            return Err(Error::NonFinite("sounder config"));
        }
        Ok(())
    }

    /// Occupied bandwidth, (num_tones - 1) x spacing.
    pub fn bandwidth_hz(&self) -> f64 {
        (self.num_tones - 1) as f64 * self.tone_spacing_hz
    }

    /// Unambiguous (circular) delay range, 1 / spacing.
    pub fn delay_range_s(&self) -> f64 {
        1.0 / self.tone_spacing_hz
    }

    /// Width of one delay bin, 1 / (num_tones x spacing).
    pub fn delay_bin_s(&self) -> f64 {
        1.0 / (self.num_tones as f64 * self.tone_spacing_hz)
    }

    /// Baseband offset of tone `k` from the centre frequency.
    pub fn tone_offset_hz(&self, k: usize) -> f64 {
        (k as f64 - (self.num_tones - 1) as f64 / 2.0) * self.tone_spacing_hz
    }
}

/// Measurement scenario class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Scenario {
    /// RX on the same street as the TX (mostly, but not always, line of sight).
    #[cfg_attr(feature = "serde", serde(rename = "street28"))]
    Street28,
    #[cfg_attr(feature = "serde", serde(rename = "nlos"))]
    NLoS,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::Street28, Scenario::NLoS];

    pub fn label(self) -> &'static str {
        match self {
            Scenario::Street28 => "street28",
            Scenario::NLoS => "nlos",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "street28" => Some(Scenario::Street28),
            "nlos" => Some(Scenario::NLoS),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocationMeta {
    pub location_id: String,
    pub tx_rx_distance_m: f64,
    pub scenario: Scenario,
    /// RX rotations (degrees) merged into this capture.
    pub rx_orientation_set: Vec<f64>,
}

impl LocationMeta {
    pub fn new(location_id: impl Into<String>, tx_rx_distance_m: f64, scenario: Scenario) -> Self {
        Self {
            location_id: location_id.into(),
            tx_rx_distance_m,
            scenario,
            rx_orientation_set: alloc::vec![0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tx_rx_distance_m > 0.0 && self.tx_rx_distance_m.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tx_rx_distance_m must be positive, got {}",
                self.tx_rx_distance_m
            )));
        }
        Ok(())
    }
}

/// Frequency response tensor `h[tx][rx][tone]` with its configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementCapture {
    config: SounderConfig,
    grid: BeamGrid,
    h: Vec<Complex32>,
    meta: LocationMeta,
}

impl MeasurementCapture {
    /// `h` is laid out tone-fastest, then RX beam, then TX beam.
    pub fn new(config: SounderConfig, grid: BeamGrid, h: Vec<Complex32>, meta: LocationMeta) -> Result<Self> {
        config.validate()?;
        meta.validate()?;
        let expected = grid.num_pairs() * config.num_tones;
        if h.len() != expected {
            return Err(Error::Dimension(format!(
                "tensor has {} entries, expected {} x {} x {} = {expected}",
                h.len(),
                grid.num_tx(),
                grid.num_rx(),
                config.num_tones
            )));
        }
        if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("frequency response tensor"));
        }
        Ok(Self { config, grid, h, meta })
    }

    pub fn config(&self) -> &SounderConfig {
        &self.config
    }

    pub fn grid(&self) -> &BeamGrid {
        &self.grid
    }

    pub fn meta(&self) -> &LocationMeta {
        &self.meta
    }

    pub fn tensor(&self) -> &[Complex32] {
        &self.h
    }

    /// (tx beams, rx beams, tones)
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.grid.num_tx(), self.grid.num_rx(), self.config.num_tones)
    }

    /// Frequency response of one beam pair, by grid index.
    pub fn response(&self, tx: usize, rx: usize) -> &[Complex32] {
        let n = self.config.num_tones;
        let start = (tx * self.grid.num_rx() + rx) * n;
        &self.h[start..start + n]
    }

    pub fn with_meta(mut self, meta: LocationMeta) -> Result<Self> {
        meta.validate()?;
        self.meta = meta;
        Ok(self)
    }

    pub fn into_parts(self) -> (SounderConfig, BeamGrid, Vec<Complex32>, LocationMeta) {
        (self.config, self.grid, self.h, self.meta)
    }
}

/// Relative floor applied to calibration magnitudes before division.
pub const CAL_CONDITIONING_RATIO: f64 = 1e-6;

/// System (back-to-back) frequency response divided out of every beam pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationProfile {
    h_cal: Vec<Complex32>,
}

impl CalibrationProfile {
    pub fn new(h_cal: Vec<Complex32>) -> Result<Self> {
        if h_cal.is_empty() {
            return Err(Error::Dimension("calibration response is empty".into()));
        }
        if h_cal.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("calibration response"));
        }
        Ok(Self { h_cal })
    }

    /// Flat unit response.
    pub fn unit(num_tones: usize) -> Self {
        Self {
            h_cal: alloc::vec![Complex32::new(1.0, 0.0); num_tones],
        }
    }

    pub fn response(&self) -> &[Complex32] {
        &self.h_cal
    }

    pub fn len(&self) -> usize {
        self.h_cal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_cal.is_empty()
    }

    /// 1e-6 x max |h_cal|.
    pub fn conditioning_floor(&self) -> f64 {
        CAL_CONDITIONING_RATIO * self.h_cal.iter().map(|v| v.norm() as f64).fold(0.0, f64::max)
    }

    /// Fails unless every tone magnitude reaches the conditioning floor.
    pub fn check_conditioned(&self) -> Result<()> {
        let floor = self.conditioning_floor();
        let min = self.h_cal.iter().map(|v| v.norm() as f64).fold(f64::INFINITY, f64::min);
        if floor <= 0.0 || min < floor {
            return Err(Error::IllConditioned { min, floor });
        }
        Ok(())
    }
}

/// Merges RX-rotated sector sweeps into one capture covering up to 360 degrees.
///
/// Sector azimuths are shifted by their rotation and wrapped into (-180, 180].
/// An angle on the boundary between two sectors is taken from the sector
/// whose boresight is nearer, ties going to the lower rotation.
pub fn merge_sector_captures(sectors: &[(f64, MeasurementCapture)]) -> Result<MeasurementCapture> {
    let (_, first) = sectors
        .first()
        .ok_or_else(|| Error::Dimension("no sector captures to merge".into()))?;
    let mut rotations: Vec<f64> = Vec::with_capacity(sectors.len());
    for (rot, cap) in sectors {
        let q = rot / 90.0;
        if !rot.is_finite() || (q - round(q)).abs() > ANGLE_TOL {
            return Err(Error::Grid(format!("sector rotation {rot} is not a multiple of 90")));
        }
        let norm = rem_euclid(*rot, 360.0);
        if rotations.iter().any(|r| (r - norm).abs() < ANGLE_TOL) {
            return Err(Error::Grid(format!("duplicate sector rotation {rot}")));
        }
        rotations.push(norm);
        if cap.config != first.config {
            return Err(Error::Dimension("sector captures use different sounder configs".into()));
        }
        if cap.grid.tx_azimuths_deg != first.grid.tx_azimuths_deg {
            return Err(Error::Dimension("sector captures use different TX grids".into()));
        }
        if let Some(a) = cap.grid.rx_azimuths_deg.iter().find(|a| a.abs() > 45.0 + ANGLE_TOL) {
            return Err(Error::Grid(format!("sector RX azimuth {a} outside [-45, 45]")));
        }
    }

    // (merged angle, sector index, rx index within the sector, |offset from boresight|)
    let mut chosen: Vec<(f64, usize, usize, f64)> = Vec::new();
    for (s, (_, cap)) in sectors.iter().enumerate() {
        for (r, &az) in cap.grid.rx_azimuths_deg.iter().enumerate() {
            let merged = wrap_azimuth(az + rotations[s]);
            let off = az.abs();
            match chosen.iter_mut().find(|c| (c.0 - merged).abs() < ANGLE_TOL) {
                None => chosen.push((merged, s, r, off)),
                Some(existing) => {
                    let at_boundary = (off - 45.0).abs() < ANGLE_TOL && (existing.3 - 45.0).abs() < ANGLE_TOL;
                    if !at_boundary {
                        return Err(Error::GridConflict(merged));
                    }
                    let better = off < existing.3 - ANGLE_TOL
                        || ((off - existing.3).abs() < ANGLE_TOL && rotations[s] < rotations[existing.1]);
                    if better {
                        *existing = (merged, s, r, off);
                    }
                }
            }
        }
    }
    chosen.sort_by(|a, b| a.0.total_cmp(&b.0));

    let rx: Vec<f64> = chosen.iter().map(|c| c.0).collect();
    let grid = BeamGrid::new(first.grid.tx_azimuths_deg.clone(), rx, first.grid.elevation_deg)?;
    let n = first.config.num_tones;
    let mut h = Vec::with_capacity(grid.num_pairs() * n);
    for t in 0..grid.num_tx() {
        for &(_, s, r, _) in &chosen {
            h.extend_from_slice(sectors[s].1.response(t, r));
        }
    }
    let mut meta = first.meta.clone();
    meta.rx_orientation_set = sectors.iter().map(|(rot, _)| *rot).collect();
    MeasurementCapture::new(first.config.clone(), grid, h, meta)
}
