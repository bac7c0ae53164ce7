use exarc::config::{EtaMode, LoopConfig};
use exarc::core::lab::{self, CavityConfig, NoiseSpec};
use exarc::core::scenarios::{self, ETA_LOOPS, G};
use exarc::io::{read_dataset, write_dataset};
use exarc::CliError;

#[test]
fn dataset_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let points = scenarios::waypoints(ETA_LOOPS, G, &scenarios::RHO1_LOOP);
    let ds = lab::synthesize(&points, &CavityConfig::default(), &NoiseSpec { relative_amplitude: 0.01, seed: 3 }).unwrap();
    let path = dir.path().join("ds.json");
    write_dataset(&path, &ds).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back, ds);
    for (a, b) in ds.steps.iter().zip(&back.steps) {
        for (ra, rb) in a.responses.iter().flatten().zip(b.responses.iter().flatten()) {
            assert_eq!(ra.re.to_bits(), rb.re.to_bits());
            assert_eq!(ra.im.to_bits(), rb.im.to_bits());
        }
    }
    let again = dir.path().join("again.json");
    write_dataset(&again, &back).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn dataset_errors_are_classified() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(read_dataset(&dir.path().join("nope.json")), Err(CliError::Io { .. })));

    let ds =
        lab::synthesize(&scenarios::waypoints(ETA_LOOPS, G, &scenarios::TRIVIAL_LOOP), &CavityConfig::default(), &NoiseSpec::noiseless())
            .unwrap();
    let mut value = serde_json::to_value(&ds).unwrap();
    value["steps"][0]["responses"].as_array_mut().unwrap().pop();
    let short = dir.path().join("short.json");
    std::fs::write(&short, value.to_string()).unwrap();
    assert!(matches!(read_dataset(&short), Err(CliError::Config(_))));
    assert_eq!(read_dataset(&short).unwrap_err().exit_code(), 2);
}

#[test]
fn loop_config_parsing() {
    let text = r#"{"label":"t","g":0.61,"waypoints":[[0.33,0.1,-0.1],[0.33,0.2,-0.1],[0.33,0.2,0.1],[0.33,0.1,-0.1]]}"#;
    let cfg = LoopConfig::from_json(text).unwrap();
    assert_eq!(cfg.eta_mode, EtaMode::Fixed);
    assert_eq!(cfg.build(None).unwrap().len(), 3 * scenarios::STEPS_PER_SEGMENT + 1);
    assert_eq!(cfg.build(Some(4)).unwrap().len(), 13);

    let open = text.replace("[0.33,0.1,-0.1]]", "[0.33,0.1,0.1]]");
    let err = LoopConfig::from_json(&open).unwrap().build(None).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    assert!(LoopConfig::from_json(&text.replace("\"label\"", "\"lable\"")).is_err());
    assert!(LoopConfig::from_json(&text.replace("}", ",\"steps_per_segment\":0}")).is_err());
}
