use hetdoa::io::{read_snapshots, snapshots_from_json, write_snapshots};
use hetdoa::prelude::*;

fn sim() -> SnapshotMatrix {
    let d = build_dictionary(&ArrayGeometry::ula(7, 0.5).unwrap(), &AngularGrid::uniform(-90.0, 90.0, 1.0).unwrap());
    let sc = SourceScenario::new(vec![-40.0, 12.0], vec![0.0, -6.0]).unwrap();
    simulate(&d, &sc, &NoiseSpec::new(NoiseCase::III, 3.0), 9, 77).unwrap().snapshots
}

#[test]
fn json_file_keeps_truth_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let y = sim();
    let p = dir.path().join("y.json");
    write_snapshots(&p, &y).unwrap();
    let back = read_snapshots(&p).unwrap();
    assert_eq!(back, y);
    assert!(back.truth.is_some());
    assert_eq!(back.seed, Some(77));
}

#[test]
fn csv_file_keeps_data() {
    let dir = tempfile::tempdir().unwrap();
    let y = sim();
    let p = dir.path().join("y.csv");
    write_snapshots(&p, &y).unwrap();
    let back = read_snapshots(&p).unwrap();
    assert_eq!(back.data(), y.data());
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("# hetdoa snapshots v1\nsensor,snapshot,re,im\n"));
    assert_eq!(text.lines().count(), 2 + 7 * 9);
}

#[test]
fn malformed_files_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"format\": \"hetdoa-snapshots\", ").unwrap();
    assert!(matches!(read_snapshots(&p), Err(DoaError::Parse { .. })));
    let wrong = "{\"format\":\"other\",\"version\":1,\"n_sensors\":1,\"n_snapshots\":1,\"data\":[0.0,0.0]}";
    assert!(snapshots_from_json(wrong).is_err());
    let truncated = "{\"format\":\"hetdoa-snapshots\",\"version\":1,\"n_sensors\":2,\"n_snapshots\":1,\"data\":[0.0,0.0]}";
    assert!(snapshots_from_json(truncated).is_err());
    assert!(read_snapshots(&dir.path().join("missing.json")).is_err());
}
