//! Single-band path-loss models `PL(d) = 10 n log10(d / 1 m) + P0 + X_sigma`,
//! fitted either with the intercept pinned to free space at 1 m (close-in)
//! or with slope and intercept jointly free (alpha-beta-gamma), plus the
//! Kolmogorov-Smirnov check of the Gaussian shadowing assumption.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{exp, log10, mean, normal_cdf, sqrt, std_population};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Terms kept in the asymptotic Kolmogorov series.
pub const KOLMOGOROV_TERMS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelFamily {
    /// Close-in: P0 fixed at free-space loss for 1 m.
    CI,
    /// Alpha-beta-gamma, single-frequency form: P0 and n fitted jointly.
    ABG,
}

impl ModelFamily {
    pub fn label(self) -> &'static str {
        match self {
            ModelFamily::CI => "CI",
            ModelFamily::ABG => "ABG",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathLossModel {
    pub n: f64,
    pub p0_db: f64,
    pub sigma_db: f64,
    pub family: ModelFamily,
}

impl PathLossModel {
    /// Mean path loss at `d_m` meters (shadowing excluded). `d_m` must be positive.
    pub fn predict(&self, d_m: f64) -> f64 {
        predict(self, d_m)
    }
}

pub fn predict(m: &PathLossModel, d_m: f64) -> f64 {
    debug_assert!(d_m > 0.0);
    10.0 * m.n * log10(d_m) + m.p0_db
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitReport {
    pub model: PathLossModel,
    pub residuals_db: Vec<f64>,
    /// Gaussian KS test of the residuals; `None` when the residuals have no spread.
    pub ks: Option<KsResult>,
}

/// Free-space loss at 1 m: 20 log10(4 pi f / c).
pub fn fspl_reference(f_hz: f64) -> f64 {
    20.0 * log10(4.0 * PI * f_hz / SPEED_OF_LIGHT_M_S)
}

fn check_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "path-loss fit needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    for &(d, pl) in samples {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain(format!("distance must be positive, got {d}")));
        }
        if !pl.is_finite() {
            return Err(Error::NonFinite("path-loss sample"));
        }
    }
    Ok(())
}

fn report(model: PathLossModel, residuals_db: Vec<f64>) -> FitReport {
    let ks = if residuals_db.len() >= 3 {
        gaussian_ks_test(&residuals_db).ok()
    } else {
        None
    };
    FitReport {
        model,
        residuals_db,
        ks,
    }
}

/// Close-in fit: closed-form MMSE slope with the intercept fixed to
/// [`fspl_reference`].
pub fn fit_ci(samples: &[(f64, f64)], f_hz: f64) -> Result<FitReport> {
    check_samples(samples)?;
    if !(f_hz > 0.0) {
        return Err(Error::Domain(format!("frequency must be positive, got {f_hz}")));
    }
    let p0 = fspl_reference(f_hz);
    let (mut sad, mut sdd) = (0.0, 0.0);
    for &(d, pl) in samples {
        let dd = 10.0 * log10(d);
        sad += (pl - p0) * dd;
        sdd += dd * dd;
    }
    if sdd == 0.0 {
        return Err(Error::Degenerate("every sample is at the 1 m reference distance".into()));
    }
    let n = sad / sdd;
    let residuals: Vec<f64> = samples
        .iter()
        .map(|&(d, pl)| pl - p0 - n * 10.0 * log10(d))
        .collect();
    let sigma_db = std_population(&residuals);
    Ok(report(
        PathLossModel {
            n,
            p0_db: p0,
            sigma_db,
            family: ModelFamily::CI,
        },
        residuals,
    ))
}

/// Alpha-beta-gamma fit: ordinary least squares of PL on 10 log10(d).
pub fn fit_abg(samples: &[(f64, f64)]) -> Result<FitReport> {
    check_samples(samples)?;
    let x: Vec<f64> = samples.iter().map(|&(d, _)| 10.0 * log10(d)).collect();
    let y: Vec<f64> = samples.iter().map(|&(_, pl)| pl).collect();
    let (mx, my) = (mean(&x), mean(&y));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(&y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("ABG fit needs at least two distinct distances".into()));
    }
    let n = sxy / sxx;
    let p0 = my - n * mx;
    let residuals: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| yi - p0 - n * xi).collect();
    let sigma_db = std_population(&residuals);
    Ok(report(
        PathLossModel {
            n,
            p0_db: p0,
            sigma_db,
            family: ModelFamily::ABG,
        },
        residuals,
    ))
}

/// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2),
/// truncated at [`KOLMOGOROV_TERMS`] terms and clamped to [0, 1].
///
/// The alternating series stalls for small lambda, so below 1.18 the
/// equivalent theta-function form of the CDF,
/// sqrt(2 pi) / lambda sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 lambda^2)), is used instead.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let mut cdf = 0.0;
        for k in 1..=KOLMOGOROV_TERMS {
            let j = (2 * k - 1) as f64;
            let term = exp(-j * j * PI * PI / (8.0 * lambda * lambda));
            cdf += term;
            if term < 1e-300 {
                break;
            }
        }
        return (1.0 - sqrt(2.0 * PI) / lambda * cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=KOLMOGOROV_TERMS {
        let kf = k as f64;
        let term = exp(-2.0 * kf * kf * lambda * lambda);
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test against N(0, sigma^2).
pub fn ks_against_gaussian(values: &[f64], sigma: f64) -> Result<KsResult> {
    if values.is_empty() {
        return Err(Error::InsufficientData("KS test needs at least one value".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Degenerate(format!("hypothesized sigma must be positive, got {sigma}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("KS sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        let cdf = normal_cdf(v / sigma);
        // The empirical CDF jumps from i/n to (i+1)/n at v.
        d = d.max(cdf - i as f64 / n).max((i + 1) as f64 / n - cdf);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(sqrt(n) * d),
    })
}

/// KS test of `residuals` against a zero-mean Gaussian whose sigma is the
/// residuals' root-mean-square about zero.
pub fn gaussian_ks_test(residuals: &[f64]) -> Result<KsResult> {
    if residuals.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "KS test needs at least 3 residuals, got {}",
            residuals.len()
        )));
    }
    let rms = sqrt(residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64);
    if !(rms > 0.0) {
        return Err(Error::Degenerate("residuals have zero variance".into()));
    }
    ks_against_gaussian(residuals, rms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fspl_values() {
        assert!((fspl_reference(27.85e9) - 61.34).abs() < 0.01);
        assert!(fspl_reference(SPEED_OF_LIGHT_M_S / (4.0 * PI)).abs() < 1e-12);
        assert!((fspl_reference(2.785e9) - (fspl_reference(27.85e9) - 20.0)).abs() < 1e-12);
        assert!((fspl_reference(2.785e9) - 41.34).abs() < 0.01);
    }

    #[test]
    fn ci_on_free_space_line() {
        let p0 = fspl_reference(27.85e9);
        let r = fit_ci(&[(10.0, p0 + 20.0), (100.0, p0 + 40.0)], 27.85e9).unwrap();
        assert!((r.model.n - 2.0).abs() < 1e-12);
        assert_eq!(r.model.p0_db, p0);
        assert_eq!(r.model.family, ModelFamily::CI);
        // the table rounds P0 to 61.34; the rounded points still give n = 2 within rounding
        let r = fit_ci(&[(10.0, 81.34), (100.0, 101.34)], 27.85e9).unwrap();
        assert!((r.model.n - 2.0).abs() < 1e-3);
    }

    #[test]
    fn ci_single_distance() {
        let p0 = fspl_reference(27.85e9);
        let r = fit_ci(&[(100.0, p0 + 35.0), (100.0, p0 + 35.0)], 27.85e9).unwrap();
        assert!((r.model.n - 1.75).abs() < 1e-12);
        assert!(r.model.sigma_db < 1e-12);
        assert!(r.ks.is_none());
    }

    #[test]
    fn ci_degenerate_geometry() {
        assert!(matches!(fit_ci(&[(1.0, 70.0), (1.0, 71.0)], 28e9), Err(Error::Degenerate(_))));
        assert!(matches!(fit_ci(&[(0.0, 70.0), (1.0, 71.0)], 28e9), Err(Error::Domain(_))));
        assert!(matches!(fit_ci(&[(10.0, 70.0)], 28e9), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn abg_exact_cases() {
        let r = fit_abg(&[(10.0, 81.34), (100.0, 101.34)]).unwrap();
        assert!((r.model.n - 2.0).abs() < 1e-12);
        assert!((r.model.p0_db - 61.34).abs() < 1e-9);
        let r = fit_abg(&[(20.0, 90.0), (200.0, 90.0)]).unwrap();
        assert!(r.model.n.abs() < 1e-12);
        assert!((r.model.p0_db - 90.0).abs() < 1e-12);
        assert!(matches!(fit_abg(&[(50.0, 90.0), (50.0, 95.0)]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn predict_values() {
        let ci = PathLossModel {
            n: 2.92,
            p0_db: 61.34,
            sigma_db: 6.45,
            family: ModelFamily::CI,
        };
        assert_eq!(ci.predict(1.0), 61.34);
        let m = PathLossModel {
            n: 2.0,
            ..ci
        };
        assert!((m.predict(100.0) - 101.34).abs() < 1e-12);
    }

    #[test]
    fn ks_single_point_at_zero() {
        let r = ks_against_gaussian(&[0.0, 0.0, 0.0], 1.0).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-15);
        assert!(matches!(gaussian_ks_test(&[0.0, 0.0, 0.0]), Err(Error::Degenerate(_))));
        assert_eq!(ks_against_gaussian(&[0.0], 1.0).unwrap().statistic, 0.5);
        assert!(matches!(ks_against_gaussian(&[], 1.0), Err(Error::InsufficientData(_))));
        assert!(matches!(gaussian_ks_test(&[0.5, -0.5]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn kolmogorov_series_reference_values() {
        // Tabulated values of the Kolmogorov distribution.
        assert!((kolmogorov_q(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_q(1.63) - 0.0098).abs() < 5e-4);
        assert!((kolmogorov_q(0.5) - 0.9639).abs() < 5e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
        assert_eq!(kolmogorov_q(0.01), 1.0);
        assert!(kolmogorov_q(10.0) < 1e-80);
        // both branches agree across the switch point
        assert!((kolmogorov_q(1.18 - 1e-9) - kolmogorov_q(1.18)).abs() < 1e-9);
        assert!((kolmogorov_q(1.0) - 0.2700).abs() < 5e-4);
    }

    #[test]
    fn ks_statistic_matches_brute_force() {
        // Brute force: evaluate |F_emp - Phi| just left and right of every sample.
        let xs = vec![-1.3, -0.2, 0.05, 0.4, 0.41, 1.7, 2.2];
        let sigma = 1.1;
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let mut d: f64 = 0.0;
        for &x in &sorted {
            let below = sorted.iter().filter(|v| **v < x).count() as f64 / n;
            let at_or_below = sorted.iter().filter(|v| **v <= x).count() as f64 / n;
            let cdf = normal_cdf(x / sigma);
            d = d.max((cdf - below).abs()).max((cdf - at_or_below).abs());
        }
        let r = ks_against_gaussian(&xs, sigma).unwrap();
        assert!((r.statistic - d).abs() < 1e-15);
    }
}
