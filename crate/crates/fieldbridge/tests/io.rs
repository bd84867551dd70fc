use fieldbridge::io::{
    read_field_csv, read_residual_csv, read_weight_bundle, write_columns_csv, write_field_csv,
    write_residual_csv, write_weight_bundle,
};
use fieldbridge::Error;
use fieldbridge_core::{build_exact_nn_weights, lame_from_engineering, FieldBuffer, MinMaxScaler};
use proptest::prelude::*;

#[test]
fn field_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let f = FieldBuffer::new(3, vec![1.0, -2.5, 0.1, 4.0, 5.0, 6.0]).unwrap();
    write_field_csv(&path, &f).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "index,c0,c1,c2\n0,1,-2.5,0.1\n1,4,5,6\n");
    assert_eq!(read_field_csv(&path).unwrap(), f);
}

#[test]
fn empty_field_round_trips_its_width() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_field_csv(&path, &FieldBuffer::zeros(0, 6).unwrap()).unwrap();
    assert_eq!(read_field_csv(&path).unwrap().shape(), (0, 6));
}

#[test]
fn malformed_field_csv_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "index,c0\n1,2.0\n").unwrap();
    assert!(matches!(read_field_csv(&path), Err(Error::Config(_))));
    std::fs::write(&path, "i,c0\n0,2.0\n").unwrap();
    assert!(matches!(read_field_csv(&path), Err(Error::Config(_))));
    std::fs::write(&path, "index,c0,c1\n0,2.0,x\n").unwrap();
    assert!(matches!(read_field_csv(&path), Err(Error::Config(_))));
    let missing = dir.path().join("missing.csv");
    let err = read_field_csv(&missing).unwrap_err();
    assert!(err.to_string().contains("missing.csv"), "{err}");
}

#[test]
fn residual_history_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let h = vec![50.0, 1.25e-3, 9.999e-9];
    write_residual_csv(&path, &h).unwrap();
    assert!(std::fs::read_to_string(&path)
        .unwrap()
        .starts_with("iteration,residual\n1,50\n"));
    assert_eq!(read_residual_csv(&path).unwrap(), h);
}

#[test]
fn columns_must_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    write_columns_csv(&path, &["a", "b"], &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,3\n2,4\n");
    assert!(write_columns_csv(&path, &["a", "b"], &[vec![1.0], vec![3.0, 4.0]]).is_err());
    assert!(write_columns_csv(&path, &["a"], &[vec![1.0], vec![3.0]]).is_err());
}

#[test]
fn weight_bundle_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let p = lame_from_engineering(200e9, 0.3).unwrap();
    let bundle = build_exact_nn_weights(&p, &MinMaxScaler::symmetric(2e-3).unwrap()).unwrap();
    write_weight_bundle(&path, &bundle).unwrap();
    assert_eq!(read_weight_bundle(&path).unwrap(), bundle);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["w0"].as_array().unwrap().len(), 6);
    assert_eq!(json["w0"][0].as_array().unwrap().len(), 20);
    assert_eq!(json["w1"].as_array().unwrap().len(), 20);
    assert_eq!(json["x_scaler"]["min"].as_array().unwrap().len(), 6);
    assert!(json["y_scaler"]["max"].is_array());
}

#[test]
fn bad_weight_bundles_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    std::fs::write(&path, r#"{"w0": [[1.0]]}"#).unwrap();
    assert!(matches!(read_weight_bundle(&path), Err(Error::Json { .. })));

    let p = lame_from_engineering(200e9, 0.3).unwrap();
    let mut bundle = build_exact_nn_weights(&p, &MinMaxScaler::symmetric(1e-3).unwrap()).unwrap();
    bundle.x_scaler.max[2] = bundle.x_scaler.min[2];
    assert!(matches!(
        write_weight_bundle(&path, &bundle),
        Err(Error::Core(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_csv_is_bit_exact(
        c in prop::sample::select(vec![1usize, 3, 6, 9]),
        raw in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 0..90),
    ) {
        let n = raw.len() / c;
        let f = FieldBuffer::new(c, raw[..n * c].to_vec()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_field_csv(&path, &f).unwrap();
        let back = read_field_csv(&path).unwrap();
        prop_assert_eq!(back.shape(), f.shape());
        for (a, b) in back.as_slice().iter().zip(f.as_slice()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
