use gkp_core::io::{load_wave, save_wave, sha256_file, write_manifest};
use gkp_core::spectral::{project_zero_mean_x1, Exponent, Field, Grid, WaveState};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn saved_fields_load_bit_identical(
        values in prop::collection::vec(-1e6f64..1e6, 16 * 8),
        l1 in 0.5f64..100.0,
        l2 in 0.5f64..100.0,
        speed in 0.1f64..10.0,
        p in prop::sample::select(vec!["1", "2", "1/3", "4/3", "3/5"]),
    ) {
        let g = Grid::new(vec![l1, l2], vec![16, 8]).unwrap();
        let f = project_zero_mean_x1(&Field::new(g, values).unwrap());
        let w = WaveState::new(f, Exponent::parse(p).unwrap(), speed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (json, bin) = save_wave(&dir.path().join("w"), &w, 1e-9).unwrap();
        let (back, header) = load_wave(&bin).unwrap();
        let a: Vec<u64> = w.field().values().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = back.field().values().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(a, b);
        prop_assert_eq!(back.grid(), w.grid());
        prop_assert_eq!(back.p(), w.p());
        prop_assert_eq!(back.speed().to_bits(), speed.to_bits());
        prop_assert_eq!(header.residual, 1e-9);
        // Loading through the sidecar path works too.
        let via_json = load_wave(&json).unwrap().0;
        prop_assert_eq!(via_json.field(), w.field());
    }
}

#[test]
fn manifest_lists_hashes_of_the_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    std::fs::write(&a, b"abc").unwrap();
    assert_eq!(
        sha256_file(&a).unwrap(),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
    let m = write_manifest(dir.path(), "test", &[a]).unwrap();
    let text = std::fs::read_to_string(m).unwrap();
    assert!(text.contains("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"));
}
