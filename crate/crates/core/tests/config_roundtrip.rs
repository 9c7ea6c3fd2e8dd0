use pinching_csi::harness::{ExperimentConfig, Method};

#[test]
fn json_round_trip_preserves_every_field() {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 77;
    cfg.trials = 13;
    cfg.methods = vec![Method::Refined, Method::Ls];
    cfg.scene.on_grid = true;
    cfg.subarray_sweep.splits = vec![(25, 35)];
    let text = cfg.to_json().unwrap();
    assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
}

#[test]
fn partial_config_falls_back_to_defaults() {
    let cfg = ExperimentConfig::from_json(r#"{"seed": 5, "waveguide": {"length_m": 3.5}}"#).unwrap();
    assert_eq!(cfg.seed, 5);
    assert_eq!(cfg.waveguide.length_m, 3.5);
    assert_eq!(cfg.trials, ExperimentConfig::default().trials);
}

#[test]
fn unknown_keys_are_rejected_at_every_level() {
    for text in [
        r#"{"seeds": 5}"#,
        r#"{"waveguide": {"length": 3.0}}"#,
        r#"{"estimator": {"angle_grid": 64}}"#,
        r#"{"subarray_sweep": {"power_dbm": 30}}"#,
    ] {
        assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
    }
}

#[test]
fn invalid_values_are_rejected() {
    for text in [
        r#"{"trials": 0}"#,
        r#"{"pilot_power_dbm": []}"#,
        r#"{"methods": ["Magic"]}"#,
        r#"{"layout": {"near_count": 30, "far_count": 30, "far_start": 550}}"#,
    ] {
        assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
    }
}
