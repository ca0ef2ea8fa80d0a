#![allow(dead_code)]

use mmw_core::{BeamGrid, CalibrationProfile, LocationMeta, MeasurementCapture, Scenario, SounderConfig};
use num_complex::Complex32;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn config(num_tones: usize) -> SounderConfig {
    SounderConfig {
        num_tones,
        ..SounderConfig::default()
    }
}

/// `ntx` x `nrx` grid starting at 0 degrees on both sides.
pub fn grid(ntx: usize, nrx: usize) -> BeamGrid {
    BeamGrid::from_spans((0.0, 5.0 * (ntx - 1) as f64), (0.0, 5.0 * (nrx - 1) as f64)).unwrap()
}

pub fn random_capture(r: &mut ChaCha8Rng, ntx: usize, nrx: usize, n: usize) -> MeasurementCapture {
    let g = grid(ntx, nrx);
    let h = (0..g.num_pairs() * n)
        .map(|_| Complex32::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    MeasurementCapture::new(config(n), g, h, LocationMeta::new("rand", 50.0, Scenario::NLoS)).unwrap()
}

pub fn random_calibration(r: &mut ChaCha8Rng, n: usize) -> CalibrationProfile {
    CalibrationProfile::new(
        (0..n)
            .map(|_| {
                let mag: f32 = r.random_range(0.5..2.0);
                let ph: f32 = r.random_range(-3.1..3.1);
                Complex32::from_polar(mag, ph)
            })
            .collect(),
    )
    .unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
