//! Scalar helpers backed by `libm` so the crate stays `no_std`, plus the
//! handful of sample statistics shared by the fitting modules.

use alloc::vec::Vec;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn powi10(x: f64) -> f64 {
    libm::pow(10.0, x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn cis(phase: f64) -> num_complex::Complex64 {
    let (s, c) = libm::sincos(phase);
    num_complex::Complex64::new(c, s)
}

#[inline]
pub(crate) fn rem_euclid(x: f64, m: f64) -> f64 {
    let r = libm::fmod(x, m);
    if r < 0.0 {
        r + m
    } else {
        r
    }
}

/// Converts a linear power ratio to decibels.
#[inline]
pub fn to_db(linear: f64) -> f64 {
    10.0 * log10(linear)
}

/// Converts decibels to a linear power ratio.
#[inline]
pub fn from_db(db: f64) -> f64 {
    powi10(db / 10.0)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population (1/n) standard deviation about the sample mean.
pub(crate) fn std_population(xs: &[f64]) -> f64 {
    let m = mean(xs);
    sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64)
}

/// Unbiased (1/(n-1)) standard deviation.
pub(crate) fn std_unbiased(xs: &[f64]) -> f64 {
    let m = mean(xs);
    sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Sample median; averages the two central values for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn std_conventions() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((std_population(&xs) - 1.25f64.sqrt()).abs() < 1e-15);
        assert!((std_unbiased(&xs) - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
