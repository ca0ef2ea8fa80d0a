//! Beam-domain delay synthesis.
//!
//! Every beam pair's calibrated frequency response is taken to the delay
//! domain with a 1/N-scaled inverse DFT; the resulting power delay profiles
//! are then reduced over angle (angular power spectrum, omnidirectional PDP,
//! power angular-delay profiles) or over delay (received power).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::capture::{BeamGrid, CalibrationProfile, MeasurementCapture, SounderConfig};
use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::math::{cis, log10};

/// Which beams a delay profile was measured or synthesized through.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ProfileKind {
    Directional { tx_deg: f64, rx_deg: f64 },
    Omni,
    BestBeam { tx_deg: f64, rx_deg: f64 },
}

/// Linear power per delay bin.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayProfile {
    power: Vec<f64>,
    delay_bin_s: f64,
    kind: ProfileKind,
}

impl DelayProfile {
    pub fn new(power: Vec<f64>, delay_bin_s: f64, kind: ProfileKind) -> Result<Self> {
        if !(delay_bin_s > 0.0 && delay_bin_s.is_finite()) {
            return Err(Error::InvalidConfig(format!("delay bin width must be positive, got {delay_bin_s}")));
        }
        if power.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("delay profile"));
        }
        if let Some(p) = power.iter().find(|p| **p < 0.0) {
            return Err(Error::Domain(format!("negative power {p} in delay profile")));
        }
        Ok(Self {
            power,
            delay_bin_s,
            kind,
        })
    }

    pub(crate) fn from_parts_unchecked(power: Vec<f64>, delay_bin_s: f64, kind: ProfileKind) -> Self {
        Self {
            power,
            delay_bin_s,
            kind,
        }
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn delay_bin_s(&self) -> f64 {
        self.delay_bin_s
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// Delay of bin `k` in seconds.
    pub fn delay_s(&self, k: usize) -> f64 {
        k as f64 * self.delay_bin_s
    }

    pub fn into_power(self) -> Vec<f64> {
        self.power
    }
}

/// Optional taper applied across the tones before the inverse transform.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Window {
    #[default]
    None,
    Hann,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DelayOptions {
    pub window: Window,
}

/// Reusable state for taking beam-pair responses to the delay domain.
#[derive(Debug, Clone)]
pub struct DelayTransform {
    fft: Fft,
    inv_cal: Vec<Complex64>,
    taper: Option<Vec<f64>>,
}

impl DelayTransform {
    pub fn new(cal: &CalibrationProfile, options: DelayOptions) -> Result<Self> {
        cal.check_conditioned()?;
        let n = cal.len();
        let inv_cal = cal
            .response()
            .iter()
            .map(|c| Complex64::new(c.re as f64, c.im as f64).inv())
            .collect();
        let taper = match options.window {
            Window::None => None,
            Window::Hann => Some(
                (0..n)
                    .map(|k| 0.5 - 0.5 * libm::cos(2.0 * PI * k as f64 / (n - 1).max(1) as f64))
                    .collect(),
            ),
        };
        Ok(Self {
            fft: Fft::new(n),
            inv_cal,
            taper,
        })
    }

    /// |IDFT{H ./ H_cal}|^2 with 1/N scaling, written into `out`.
    pub fn power_into(&self, h: &[num_complex::Complex32], out: &mut [f64]) {
        self.transform(h.iter().map(|v| Complex64::new(v.re as f64, v.im as f64)), out);
    }

    /// [`Self::power_into`] for a double-precision response.
    pub fn power_into_f64(&self, h: &[Complex64], out: &mut [f64]) {
        self.transform(h.iter().copied(), out);
    }

    fn transform(&self, h: impl Iterator<Item = Complex64>, out: &mut [f64]) {
        let n = self.inv_cal.len();
        let mut buf: Vec<Complex64> = h.zip(&self.inv_cal).map(|(v, ic)| v * ic).collect();
        if let Some(w) = &self.taper {
            for (b, w) in buf.iter_mut().zip(w) {
                *b *= *w;
            }
        }
        self.fft.inverse(&mut buf);
        let scale = 1.0 / n as f64;
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = (b * scale).norm_sqr();
        }
    }
}

fn check_cal_len(c: &MeasurementCapture, cal: &CalibrationProfile) -> Result<()> {
    if cal.len() != c.config().num_tones {
        return Err(Error::Dimension(format!(
            "calibration has {} tones, capture has {}",
            cal.len(),
            c.config().num_tones
        )));
    }
    Ok(())
}

/// Directional PDP of one beam pair, without windowing.
pub fn directional_pdp(c: &MeasurementCapture, cal: &CalibrationProfile, tx_deg: f64, rx_deg: f64) -> Result<DelayProfile> {
    directional_pdp_with(c, cal, tx_deg, rx_deg, DelayOptions::default())
}

pub fn directional_pdp_with(
    c: &MeasurementCapture,
    cal: &CalibrationProfile,
    tx_deg: f64,
    rx_deg: f64,
    options: DelayOptions,
) -> Result<DelayProfile> {
    check_cal_len(c, cal)?;
    let ti = c.grid().tx_index(tx_deg)?;
    let ri = c.grid().rx_index(rx_deg)?;
    let xf = DelayTransform::new(cal, options)?;
    let mut power = vec![0.0; c.config().num_tones];
    xf.power_into(c.response(ti, ri), &mut power);
    Ok(DelayProfile::from_parts_unchecked(
        power,
        c.config().delay_bin_s(),
        ProfileKind::Directional {
            tx_deg: c.grid().tx_azimuths_deg()[ti],
            rx_deg: c.grid().rx_azimuths_deg()[ri],
        },
    ))
}

/// Directional PDPs of every beam pair, stored as a `[tx][rx][delay]` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalPdps {
    grid: BeamGrid,
    delay_bin_s: f64,
    num_bins: usize,
    power: Vec<f64>,
}

impl DirectionalPdps {
    pub fn compute(c: &MeasurementCapture, cal: &CalibrationProfile) -> Result<Self> {
        Self::compute_with(c, cal, DelayOptions::default())
    }

    pub fn compute_with(c: &MeasurementCapture, cal: &CalibrationProfile, options: DelayOptions) -> Result<Self> {
        check_cal_len(c, cal)?;
        let xf = DelayTransform::new(cal, options)?;
        let (nt, nr, n) = c.dims();
        let mut power = vec![0.0; nt * nr * n];
        for t in 0..nt {
            for r in 0..nr {
                let start = (t * nr + r) * n;
                xf.power_into(c.response(t, r), &mut power[start..start + n]);
            }
        }
        Ok(Self {
            grid: c.grid().clone(),
            delay_bin_s: c.config().delay_bin_s(),
            num_bins: n,
            power,
        })
    }

    /// Assembles a tensor from individual directional profiles; every beam
    /// pair of `grid` must appear exactly once.
    pub fn from_profiles(grid: BeamGrid, profiles: &[DelayProfile]) -> Result<Self> {
        let first = profiles
            .first()
            .ok_or(Error::MissingBeam {
                tx_deg: grid.tx_azimuths_deg()[0],
                rx_deg: grid.rx_azimuths_deg()[0],
            })?;
        let n = first.len();
        let delay_bin_s = first.delay_bin_s();
        let mut slots: Vec<Option<&DelayProfile>> = vec![None; grid.num_pairs()];
        for p in profiles {
            let ProfileKind::Directional { tx_deg, rx_deg } = p.kind() else {
                return Err(Error::Grid("only directional profiles can form a beam tensor".into()));
            };
            if p.len() != n || p.delay_bin_s() != delay_bin_s {
                return Err(Error::Dimension("directional profiles differ in length or bin width".into()));
            }
            let idx = grid.tx_index(tx_deg)? * grid.num_rx() + grid.rx_index(rx_deg)?;
            if slots[idx].is_some() {
                return Err(Error::Grid(format!("beam pair ({tx_deg}, {rx_deg}) given twice")));
            }
            slots[idx] = Some(p);
        }
        let mut power = Vec::with_capacity(grid.num_pairs() * n);
        for (idx, slot) in slots.iter().enumerate() {
            match slot {
                Some(p) => power.extend_from_slice(p.power()),
                None => {
                    return Err(Error::MissingBeam {
                        tx_deg: grid.tx_azimuths_deg()[idx / grid.num_rx()],
                        rx_deg: grid.rx_azimuths_deg()[idx % grid.num_rx()],
                    })
                }
            }
        }
        Ok(Self {
            grid,
            delay_bin_s,
            num_bins: n,
            power,
        })
    }

    /// Raw constructor for a `[tx][rx][delay]` tensor.
    pub fn from_tensor(grid: BeamGrid, delay_bin_s: f64, num_bins: usize, power: Vec<f64>) -> Result<Self> {
        if power.len() != grid.num_pairs() * num_bins {
            return Err(Error::Dimension(format!(
                "power tensor has {} entries, expected {}",
                power.len(),
                grid.num_pairs() * num_bins
            )));
        }
        if !(delay_bin_s > 0.0 && delay_bin_s.is_finite()) {
            return Err(Error::InvalidConfig(format!("delay bin width must be positive, got {delay_bin_s}")));
        }
        if power.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::NonFinite("power tensor"));
        }
        Ok(Self {
            grid,
            delay_bin_s,
            num_bins,
            power,
        })
    }

    pub fn grid(&self) -> &BeamGrid {
        &self.grid
    }

    pub fn delay_bin_s(&self) -> f64 {
        self.delay_bin_s
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn tensor(&self) -> &[f64] {
        &self.power
    }

    pub(crate) fn tensor_mut(&mut self) -> &mut [f64] {
        &mut self.power
    }

    /// Power slice of one beam pair by grid index.
    pub fn pair(&self, tx: usize, rx: usize) -> &[f64] {
        let start = (tx * self.grid.num_rx() + rx) * self.num_bins;
        &self.power[start..start + self.num_bins]
    }

    pub fn at(&self, tx: usize, rx: usize, bin: usize) -> f64 {
        self.power[(tx * self.grid.num_rx() + rx) * self.num_bins + bin]
    }

    /// One beam pair as a standalone profile.
    pub fn profile(&self, tx: usize, rx: usize) -> DelayProfile {
        DelayProfile::from_parts_unchecked(
            self.pair(tx, rx).to_vec(),
            self.delay_bin_s,
            ProfileKind::Directional {
                tx_deg: self.grid.tx_azimuths_deg()[tx],
                rx_deg: self.grid.rx_azimuths_deg()[rx],
            },
        )
    }

    /// Multiplies every cell by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.power.iter_mut().for_each(|p| *p *= k);
        out
    }
}

/// Total power per (TX beam, RX beam).
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSpectrum {
    power: Vec<f64>,
    grid: BeamGrid,
}

impl AngularSpectrum {
    pub fn new(grid: BeamGrid, power: Vec<f64>) -> Result<Self> {
        if power.len() != grid.num_pairs() {
            return Err(Error::Dimension("angular spectrum does not match its grid".into()));
        }
        if power.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Domain("angular spectrum entries must be finite and non-negative".into()));
        }
        Ok(Self { power, grid })
    }

    pub fn grid(&self) -> &BeamGrid {
        &self.grid
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn at(&self, tx: usize, rx: usize) -> f64 {
        self.power[tx * self.grid.num_rx() + rx]
    }
}

pub fn angular_power_spectrum(pdps: &DirectionalPdps) -> AngularSpectrum {
    let power = pdps.power.chunks(pdps.num_bins.max(1)).map(|c| c.iter().sum()).collect();
    AngularSpectrum {
        power: if pdps.num_bins == 0 { vec![0.0; pdps.grid.num_pairs()] } else { power },
        grid: pdps.grid.clone(),
    }
}

/// Per-delay maximum over every beam pair.
pub fn omni_pdp(pdps: &DirectionalPdps) -> DelayProfile {
    let mut out = vec![0.0f64; pdps.num_bins];
    for pair in pdps.power.chunks(pdps.num_bins.max(1)) {
        for (o, p) in out.iter_mut().zip(pair) {
            *o = o.max(*p);
        }
    }
    DelayProfile::from_parts_unchecked(out, pdps.delay_bin_s, ProfileKind::Omni)
}

/// Which link end's beams are kept in a PADP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PadpSide {
    /// Indexed by RX beam; maximized over TX beams.
    RxSide,
    /// Indexed by TX beam; maximized over RX beams.
    TxSide,
}

/// Power angular-delay profile, `power[beam][delay]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Padp {
    power: Vec<f64>,
    num_beams: usize,
    num_bins: usize,
    side: PadpSide,
}

impl Padp {
    pub fn side(&self) -> PadpSide {
        self.side
    }

    pub fn num_beams(&self) -> usize {
        self.num_beams
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn beam(&self, i: usize) -> &[f64] {
        &self.power[i * self.num_bins..(i + 1) * self.num_bins]
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }
}

pub fn padp(pdps: &DirectionalPdps, side: PadpSide) -> Padp {
    let (nt, nr, n) = (pdps.grid.num_tx(), pdps.grid.num_rx(), pdps.num_bins);
    let num_beams = match side {
        PadpSide::RxSide => nr,
        PadpSide::TxSide => nt,
    };
    let mut power = vec![0.0f64; num_beams * n];
    for t in 0..nt {
        for r in 0..nr {
            let b = match side {
                PadpSide::RxSide => r,
                PadpSide::TxSide => t,
            };
            for (o, p) in power[b * n..(b + 1) * n].iter_mut().zip(pdps.pair(t, r)) {
                *o = o.max(*p);
            }
        }
    }
    Padp {
        power,
        num_beams,
        num_bins: n,
        side,
    }
}

/// Sum of power over all bins.
pub fn received_power(p: &DelayProfile) -> f64 {
    p.power.iter().sum()
}

/// Beam pair (TX deg, RX deg) with the largest angular-spectrum entry.
/// Ties go to the lexicographically smallest pair.
pub fn best_beam_pair(pas: &AngularSpectrum) -> (f64, f64) {
    let nr = pas.grid.num_rx();
    let mut best = 0usize;
    for (i, p) in pas.power.iter().enumerate() {
        if *p > pas.power[best] {
            best = i;
        }
    }
    (pas.grid.tx_azimuths_deg()[best / nr], pas.grid.rx_azimuths_deg()[best % nr])
}

/// PDP of the given beam pair, tagged as the best-beam profile.
pub fn best_beam_pdp(pdps: &DirectionalPdps, pair: (f64, f64)) -> Result<DelayProfile> {
    let t = pdps.grid.tx_index(pair.0)?;
    let r = pdps.grid.rx_index(pair.1)?;
    Ok(DelayProfile::from_parts_unchecked(
        pdps.pair(t, r).to_vec(),
        pdps.delay_bin_s,
        ProfileKind::BestBeam {
            tx_deg: pair.0,
            rx_deg: pair.1,
        },
    ))
}

/// Path loss in dB from a linear received power: offset - 10 log10(p_rx).
pub fn path_loss_db(p_rx: f64, cfg: &SounderConfig) -> Result<f64> {
    if !(p_rx > 0.0) || !p_rx.is_finite() {
        return Err(Error::Domain(format!("received power must be positive, got {p_rx}")));
    }
    Ok(cfg.link_budget_offset_db - 10.0 * log10(p_rx))
}

/// exp(-j 2 pi f tau) evaluated on the capture's tone offsets.
pub fn delay_ramp(cfg: &SounderConfig, tau_s: f64) -> Vec<Complex64> {
    (0..cfg.num_tones)
        .map(|k| cis(-2.0 * PI * cfg.tone_offset_hz(k) * tau_s))
        .collect()
}
