use mmw_core::{BeamGrid, LocationMeta, MeasurementCapture, Scenario, SounderConfig};
use mmw_sounder::format::{encode_capture, load_capture, read_capture, save_capture};
use mmw_sounder::text::{capture_from_text, capture_to_text};
use num_complex::Complex32;
use proptest::prelude::*;

fn finite_f32() -> impl Strategy<Value = f32> {
    any::<u32>().prop_map(f32::from_bits).prop_filter("finite", |v| v.is_finite())
}

prop_compose! {
    fn capture()(ntx in 1usize..4, nrx in 1usize..5, n in 2usize..9, seed in any::<u64>(), d in 1.0f64..500.0, nlos in any::<bool>())
               (values in prop::collection::vec((finite_f32(), finite_f32()), ntx * nrx * n), ntx in Just(ntx), nrx in Just(nrx), n in Just(n), seed in Just(seed), d in Just(d), nlos in Just(nlos))
               -> MeasurementCapture {
        let grid = BeamGrid::from_spans((-45.0, -45.0 + 5.0 * (ntx - 1) as f64), (-175.0, -175.0 + 5.0 * (nrx - 1) as f64)).unwrap();
        let cfg = SounderConfig { num_tones: n, ..SounderConfig::default() };
        let h = values.into_iter().map(|(a, b)| Complex32::new(a, b)).collect();
        let scenario = if nlos { Scenario::NLoS } else { Scenario::Street28 };
        MeasurementCapture::new(cfg, grid, h, LocationMeta::new(format!("loc-{seed}"), d, scenario)).unwrap()
    }
}

fn bits(c: &MeasurementCapture) -> Vec<(u32, u32)> {
    c.tensor().iter().map(|v| (v.re.to_bits(), v.im.to_bits())).collect()
}

proptest! {
    #[test]
    fn binary_round_trip_is_bit_exact(c in capture()) {
        let back = read_capture(&encode_capture(&c).unwrap()[..]).unwrap();
        prop_assert_eq!(bits(&back), bits(&c));
        prop_assert_eq!(back.meta(), c.meta());
        prop_assert_eq!(back.grid(), c.grid());
        prop_assert_eq!(back.config(), c.config());
    }

    #[test]
    fn text_round_trip_is_bit_exact(c in capture()) {
        let back = capture_from_text(&capture_to_text(&c).unwrap()).unwrap();
        prop_assert_eq!(bits(&back), bits(&c));
        prop_assert_eq!(back.meta(), c.meta());
    }
}

#[test]
fn file_round_trip_and_atomic_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.mmw");
    let cfg = SounderConfig { num_tones: 4, ..SounderConfig::default() };
    let grid = BeamGrid::from_spans((0.0, 5.0), (0.0, 0.0)).unwrap();
    let mk = |v: f32| {
        MeasurementCapture::new(cfg.clone(), grid.clone(), vec![Complex32::new(v, -v); 8], LocationMeta::new("x", 9.0, Scenario::NLoS)).unwrap()
    };
    save_capture(&path, &mk(1.0)).unwrap();
    save_capture(&path, &mk(2.0)).unwrap();
    assert_eq!(load_capture(&path).unwrap(), mk(2.0));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..8], b"MMWCAP01");
    let len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    assert_eq!(bytes.len(), 12 + len + 8 * 8);
    assert_eq!(&bytes[12 + len..12 + len + 4], &2.0f32.to_le_bytes());
}
