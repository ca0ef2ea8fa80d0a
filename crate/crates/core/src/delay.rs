//! Noise floors, two-tier noise gating, RMS delay spread, and log-normal
//! delay-spread statistics.
//!
//! Gating runs in the same order as the processing chain: each directional
//! profile is cleared at or below 4 sigma^2 of its own beam pair, the
//! omnidirectional profile is then rebuilt from the gated pairs, and only
//! bins strictly above 2 sigma^2 of the omni noise enter the delay-spread
//! moments.

use alloc::format;
use alloc::vec::Vec;

use crate::beam::{DelayProfile, DirectionalPdps};
use crate::error::{Error, Result};
use crate::math::{ceil, from_db, log10, mean, median, sqrt, std_unbiased};
use crate::pathloss::{gaussian_ks_test, KsResult};

/// Multiplier on the per-beam-pair noise power below which a directional bin is cleared.
pub const DIRECTIONAL_GATE_FACTOR: f64 = 4.0;
/// Multiplier on the omni noise power a bin must exceed to enter the delay-spread support.
pub const SUPPORT_FACTOR: f64 = 2.0;
/// Fraction of trailing delay bins used for the noise-floor estimate.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;

/// Bins this far below the strongest bin of a tensor are treated as zero by
/// [`gate_all`]. Single-precision captures carry no information that deep, so
/// anything there is rounding residue, not noise or signal.
pub const DYNAMIC_RANGE_DB: f64 = 120.0;

const MIN_NOISE_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NoiseMethod {
    TailRegion,
    Manual,
}

/// Noise power per beam pair plus the omni noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimate {
    per_pair: Vec<f64>,
    num_rx: usize,
    omni: f64,
    method: NoiseMethod,
}

impl NoiseEstimate {
    /// Estimates every beam pair from its trailing bins; the omni level is
    /// the largest per-pair level.
    pub fn from_tail(pdps: &DirectionalPdps, tail_fraction: f64) -> Result<Self> {
        let grid = pdps.grid();
        let mut per_pair = Vec::with_capacity(grid.num_pairs());
        for t in 0..grid.num_tx() {
            for r in 0..grid.num_rx() {
                per_pair.push(noise_floor(pdps.pair(t, r), tail_fraction)?);
            }
        }
        let omni = per_pair.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            per_pair,
            num_rx: grid.num_rx(),
            omni,
            method: NoiseMethod::TailRegion,
        })
    }

    /// Known noise powers, `per_pair` indexed `[tx][rx]`.
    pub fn manual(per_pair: Vec<f64>, num_rx: usize) -> Result<Self> {
        if num_rx == 0 || per_pair.is_empty() || !per_pair.len().is_multiple_of(num_rx) {
            return Err(Error::Dimension("noise matrix does not match the RX grid".into()));
        }
        if let Some(s) = per_pair.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
            return Err(Error::Degenerate(format!("noise power must be positive, got {s}")));
        }
        let omni = per_pair.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            per_pair,
            num_rx,
            omni,
            method: NoiseMethod::Manual,
        })
    }

    pub fn pair(&self, tx: usize, rx: usize) -> f64 {
        self.per_pair[tx * self.num_rx + rx]
    }

    pub fn per_pair(&self) -> &[f64] {
        &self.per_pair
    }

    pub fn omni(&self) -> f64 {
        self.omni
    }

    pub fn method(&self) -> NoiseMethod {
        self.method
    }
}

/// Mean power over the final ceil(tail_fraction x N) bins.
pub fn estimate_noise(p: &DelayProfile, tail_fraction: f64) -> Result<f64> {
    noise_floor(p.power(), tail_fraction)
}

fn noise_floor(power: &[f64], tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::InvalidConfig(format!("tail fraction must be in (0, 0.5], got {tail_fraction}")));
    }
    if power.len() < MIN_NOISE_BINS {
        return Err(Error::InsufficientData(format!(
            "noise estimation needs at least {MIN_NOISE_BINS} delay bins, got {}",
            power.len()
        )));
    }
    let count = (ceil(tail_fraction * power.len() as f64) as usize).clamp(1, power.len());
    let sigma2 = mean(&power[power.len() - count..]);
    if !(sigma2 > 0.0) {
        return Err(Error::Degenerate("noise floor estimate is zero".into()));
    }
    Ok(sigma2)
}

/// Clears bins at or below `factor x sigma2`.
pub fn gate_power(power: &[f64], sigma2: f64, factor: f64) -> Vec<f64> {
    let threshold = factor * sigma2;
    power.iter().map(|&p| if p > threshold { p } else { 0.0 }).collect()
}

/// Per-beam gate: bins at or below 4 sigma^2 are zeroed.
pub fn gate_directional(p: &DelayProfile, sigma2: f64) -> DelayProfile {
    gate_directional_with(p, sigma2, DIRECTIONAL_GATE_FACTOR)
}

pub fn gate_directional_with(p: &DelayProfile, sigma2: f64, factor: f64) -> DelayProfile {
    DelayProfile::from_parts_unchecked(gate_power(p.power(), sigma2, factor), p.delay_bin_s(), p.kind())
}

/// Applies the per-beam gate to every pair of the tensor.
///
/// The threshold never drops below [`DYNAMIC_RANGE_DB`] under the tensor
/// peak; it only matters for noiseless synthetic captures, whose tail
/// "noise" is rounding error.
pub fn gate_all(pdps: &DirectionalPdps, noise: &NoiseEstimate, factor: f64) -> DirectionalPdps {
    let mut out = pdps.clone();
    let n = pdps.num_bins();
    let nr = pdps.grid().num_rx();
    let peak = pdps.tensor().iter().fold(0.0f64, |m, &p| m.max(p));
    let floor = peak * from_db(-DYNAMIC_RANGE_DB);
    for (idx, chunk) in out.tensor_mut().chunks_mut(n.max(1)).enumerate() {
        let threshold = (factor * noise.pair(idx / nr, idx % nr)).max(floor);
        for p in chunk.iter_mut() {
            if *p <= threshold {
                *p = 0.0;
            }
        }
    }
    out
}

/// Bins strictly above 2 sigma^2 of the omni noise.
pub fn gated_delay_support(p: &DelayProfile, sigma2_omni: f64) -> Vec<usize> {
    support_above(p, SUPPORT_FACTOR * sigma2_omni)
}

pub fn support_above(p: &DelayProfile, threshold: f64) -> Vec<usize> {
    p.power()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > threshold)
        .map(|(i, _)| i)
        .collect()
}

/// Square root of the second central moment of the profile over `support`.
pub fn rms_delay_spread(p: &DelayProfile, support: &[usize]) -> Result<f64> {
    let total: f64 = support.iter().map(|&k| p.power()[k]).sum();
    if support.is_empty() || !(total > 0.0) {
        return Err(Error::NoSignal);
    }
    // Moments about the first support delay; the spread is shift invariant
    // and this keeps the subtraction well conditioned.
    let origin = support[0];
    let (mut m1, mut m2) = (0.0, 0.0);
    for &k in support {
        let tau = (k as f64 - origin as f64) * p.delay_bin_s();
        let w = p.power()[k] / total;
        m1 += w * tau;
        m2 += w * tau * tau;
    }
    Ok(sqrt((m2 - m1 * m1).max(0.0)))
}

/// Log-normal summary of delay spreads across locations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DelaySpreadStats {
    pub values_s: Vec<f64>,
    pub median_s: f64,
    /// Mean of log10(seconds).
    pub mu_log: f64,
    /// Unbiased standard deviation of log10(seconds).
    pub sigma_log: f64,
    /// KS p-value of the standardized logs; `None` when there are fewer
    /// than three values or the logs have no spread.
    pub ks_p: Option<f64>,
}

pub fn fit_log_ds(values_s: &[f64]) -> Result<DelaySpreadStats> {
    if values_s.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "delay-spread statistics need at least 2 values, got {}",
            values_s.len()
        )));
    }
    if let Some(v) = values_s.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("delay spreads must be positive, got {v}")));
    }
    let logs: Vec<f64> = values_s.iter().map(|v| log10(*v)).collect();
    let mu_log = mean(&logs);
    let sigma_log = std_unbiased(&logs);
    let ks_p = if logs.len() >= 3 && sigma_log > 0.0 {
        let z: Vec<f64> = logs.iter().map(|l| (l - mu_log) / sigma_log).collect();
        gaussian_ks_test(&z).ok().map(|KsResult { p_value, .. }| p_value)
    } else {
        None
    };
    Ok(DelaySpreadStats {
        values_s: values_s.to_vec(),
        median_s: median(values_s),
        mu_log,
        sigma_log,
        ks_p,
    })
}

/// Propagation condition for the urban-micro delay-spread reference model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LinkState {
    Los,
    Nlos,
}

/// Urban-micro mean of log10(RMS-DS / 1 s) at `f_ghz`.
pub fn three_gpp_mu(f_ghz: f64, state: LinkState) -> f64 {
    let l = log10(1.0 + f_ghz);
    match state {
        LinkState::Los => -0.2 * l - 7.2,
        LinkState::Nlos => -0.21 * l - 6.88,
    }
}
