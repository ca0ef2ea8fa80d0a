//! Multipath component extraction by 3-D peak picking over
//! (TX azimuth, RX azimuth, delay), followed by per-delay-bin rejection of
//! beam-sidelobe ghosts.

use alloc::vec::Vec;

use crate::beam::{DelayOptions, DirectionalPdps};
use crate::capture::{CalibrationProfile, MeasurementCapture};
use crate::delay::{gate_all, NoiseEstimate, DEFAULT_TAIL_FRACTION, DIRECTIONAL_GATE_FACTOR};
use crate::error::Result;

/// Components more than this factor below the strongest one in their delay bin are dropped (10 dB).
pub const SIDELOBE_REJECTION_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MultipathComponent {
    /// Direction of departure (TX azimuth), degrees.
    pub dod_deg: f64,
    /// Direction of arrival (RX azimuth), degrees.
    pub doa_deg: f64,
    pub delay_s: f64,
    /// Linear path power.
    pub gain: f64,
}

/// Every strict local maximum of the tensor over its 26-neighbourhood.
///
/// RX azimuth wraps around when the RX grid closes the full circle; TX
/// azimuth and delay are bounded. A cell equal to any neighbour is not a peak,
/// so zero cells never qualify.
pub fn detect_peaks_3d(p: &DirectionalPdps) -> Vec<MultipathComponent> {
    let grid = p.grid();
    let (nt, nr, nb) = (grid.num_tx(), grid.num_rx(), p.num_bins());
    let wrap = grid.rx_wraps();
    let mut out = Vec::new();
    for t in 0..nt {
        for r in 0..nr {
            for k in 0..nb {
                let v = p.at(t, r, k);
                if v <= 0.0 {
                    continue;
                }
                if is_strict_max(p, (t, r, k), v, wrap) {
                    out.push(MultipathComponent {
                        dod_deg: grid.tx_azimuths_deg()[t],
                        doa_deg: grid.rx_azimuths_deg()[r],
                        delay_s: k as f64 * p.delay_bin_s(),
                        gain: v,
                    });
                }
            }
        }
    }
    out
}

fn is_strict_max(p: &DirectionalPdps, (t, r, k): (usize, usize, usize), v: f64, wrap: bool) -> bool {
    let grid = p.grid();
    let (nt, nr, nb) = (grid.num_tx() as isize, grid.num_rx() as isize, p.num_bins() as isize);
    for dt in -1isize..=1 {
        let tt = t as isize + dt;
        if tt < 0 || tt >= nt {
            continue;
        }
        for dr in -1isize..=1 {
            let mut rr = r as isize + dr;
            if rr < 0 || rr >= nr {
                if !wrap {
                    continue;
                }
                rr = rr.rem_euclid(nr);
            }
            for dk in -1isize..=1 {
                if dt == 0 && dr == 0 && dk == 0 {
                    continue;
                }
                let kk = k as isize + dk;
                if kk < 0 || kk >= nb {
                    continue;
                }
                // A wrapped neighbour can be the cell itself on a 1- or 2-beam circle.
                if (tt as usize, rr as usize, kk as usize) == (t, r, k) {
                    continue;
                }
                if p.at(tt as usize, rr as usize, kk as usize) >= v {
                    return false;
                }
            }
        }
    }
    true
}

/// Keeps, within each delay bin, only components whose gain exceeds a tenth
/// of the strongest component in that bin. Input order is preserved.
pub fn sidelobe_filter(mpcs: &[MultipathComponent]) -> Vec<MultipathComponent> {
    let bin_max = |delay: f64| {
        mpcs.iter()
            .filter(|m| m.delay_s.to_bits() == delay.to_bits())
            .map(|m| m.gain)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    mpcs.iter()
        .filter(|m| {
            let max = bin_max(m.delay_s);
            m.gain == max || m.gain > max / SIDELOBE_REJECTION_RATIO
        })
        .copied()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcOptions {
    pub tail_fraction: f64,
    pub gate_factor: f64,
    pub delay: DelayOptions,
}

impl Default for MpcOptions {
    fn default() -> Self {
        Self {
            tail_fraction: DEFAULT_TAIL_FRACTION,
            gate_factor: DIRECTIONAL_GATE_FACTOR,
            delay: DelayOptions::default(),
        }
    }
}

/// Directional PDPs, per-beam gating, 3-D peak detection, and sidelobe
/// rejection, strongest component first.
pub fn extract_mpcs(c: &MeasurementCapture, cal: &CalibrationProfile) -> Result<Vec<MultipathComponent>> {
    extract_mpcs_with(c, cal, &MpcOptions::default())
}

pub fn extract_mpcs_with(
    c: &MeasurementCapture,
    cal: &CalibrationProfile,
    options: &MpcOptions,
) -> Result<Vec<MultipathComponent>> {
    let pdps = DirectionalPdps::compute_with(c, cal, options.delay)?;
    let noise = NoiseEstimate::from_tail(&pdps, options.tail_fraction)?;
    Ok(mpcs_from_gated(&gate_all(&pdps, &noise, options.gate_factor)))
}

/// Peak detection and sidelobe rejection on an already gated tensor.
pub fn mpcs_from_gated(gated: &DirectionalPdps) -> Vec<MultipathComponent> {
    let mut mpcs = sidelobe_filter(&detect_peaks_3d(gated));
    mpcs.sort_by(|a, b| b.gain.total_cmp(&a.gain));
    mpcs
}
