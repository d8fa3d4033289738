use std::fs;
use std::process::Command;

use microlocal_cli::{
    find, run_experiment, write_outputs, CliError, ExperimentConfig, RunOptions, REGISTRY,
};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_microlocal"));
    c.env("RUST_LOG", "warn");
    c
}

#[test]
fn registry_covers_every_criterion_once() {
    let mut seen: Vec<u8> = REGISTRY.iter().map(|s| s.criterion).collect();
    seen.sort_unstable();
    assert_eq!(seen, (1..=16).collect::<Vec<u8>>());
    for s in REGISTRY {
        assert_eq!(find(s.id).map(|f| f.criterion), Some(s.criterion));
    }
}

#[test]
fn same_seed_same_envelope() {
    let mut cfg = ExperimentConfig::new("product-rule");
    cfg.seed = Some(11);
    let a = run_experiment(&cfg, None, &RunOptions::default()).unwrap();
    let b = run_experiment(&cfg, None, &RunOptions::default()).unwrap();
    assert_eq!(a.envelope.to_json(), b.envelope.to_json());
    assert_eq!(a.envelope.seed, 11);
    let c = run_experiment(&cfg, None, &RunOptions { seed: Some(12) }).unwrap();
    assert_eq!(c.envelope.seed, 12);
}

#[test]
fn config_round_trips_through_toml() {
    let text = r#"
experiment = "fbi-isometry"
seed = 7
out = "results"

[params]
mixtures = 4
tolerance = 1e-6

[params.ladder]
h_max = 0.4
ratio = 0.7
count = 6
"#;
    let cfg = ExperimentConfig::parse(text).unwrap();
    assert_eq!(cfg.seed, Some(7));
    assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn misspelled_param_is_named() {
    let cfg = ExperimentConfig::parse(
        "experiment = \"fbi-radial\"\n[params]\ntolerence = 1e-3\n",
    )
    .unwrap();
    match run_experiment(&cfg, None, &RunOptions::default()) {
        Err(CliError::Schema { field, message }) => {
            assert!(field.starts_with("params"), "{field}");
            assert!(message.contains("tolerence"), "{message}");
        }
        Err(e) => panic!("expected a schema error, got {e}"),
        Ok(_) => panic!("unknown key accepted"),
    }
}

#[test]
fn wrong_type_names_the_nested_field() {
    let cfg = ExperimentConfig::parse(
        "experiment = \"qm-identity\"\n[params.ladder]\ncount = \"many\"\n",
    )
    .unwrap();
    match run_experiment(&cfg, None, &RunOptions::default()) {
        Err(CliError::Schema { field, .. }) => assert_eq!(field, "params.ladder.count"),
        Err(e) => panic!("expected a schema error, got {e}"),
        Ok(_) => panic!("string count accepted"),
    }
}

#[test]
fn unknown_top_level_key_is_rejected() {
    let e = ExperimentConfig::parse("experiment = \"pullback\"\nsed = 3\n").unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("sed"), "{e}");
}

#[test]
fn outputs_land_in_the_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::new("causal-geometry");
    let o = run_experiment(&cfg, None, &RunOptions::default()).unwrap();
    let written = write_outputs(&o, dir.path(), true).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert!(names.contains(&"causal-geometry.json".to_string()));
    assert!(names.contains(&"causal-geometry.masks.csv".to_string()));
    assert!(names.iter().any(|n| n.ends_with(".png")));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("causal-geometry.json")).unwrap())
            .unwrap();
    assert_eq!(json["experiment"], "causal-geometry");
    assert_eq!(json["criterion"], 13);
    assert_eq!(json["pass"], true);
    assert!(json["config"].as_str().unwrap().contains("causal-geometry"));
}

#[test]
fn binary_runs_a_config_and_keeps_it_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let text = "# comment kept\nexperiment = \"spectral-class\"\n\n[params]\nk_max = 10\n";
    fs::write(&path, text).unwrap();
    let out = bin()
        .args(["spectral", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS criterion 10 spectral-class"));
    let json: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("spectral-class.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["config"], text);
    assert_eq!(json["params"]["k_max"], 10);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| {
        bin()
            .args(args)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(code(&["fbi", "no-such-experiment"]), Some(2));
    // Known id, wrong group.
    assert_eq!(code(&["fbi", "pullback"]), Some(2));
    assert_eq!(code(&["qm", "qm-identity"]), Some(1));
    assert_eq!(code(&["calculus", "pullback"]), Some(0));

    let path = dir.path().join("bad.toml");
    fs::write(&path, "experiment = \"pullback\"\n[params]\nbogus = 1\n").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&["calculus", "--config", p]), Some(2));
    fs::write(&path, "experiment = \"pullback\"\n").unwrap();
    assert_eq!(code(&["fbi", "--config", p]), Some(2));
    assert_eq!(code(&["calculus", "product-rule", "--config", p]), Some(2));
    assert_eq!(code(&["calculus", "--config", "/nonexistent/x.toml"]), Some(2));
}

#[test]
fn verdict_failures_are_listed_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["qm", "qm-identity", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let start = stdout.find('{').expect("failure list");
    let v: serde_json::Value = serde_json::from_str(&stdout[start..]).unwrap();
    let f = &v["failures"][0];
    assert_eq!(f["experiment"], "qm-identity");
    assert_eq!(f["check"], "delta_at_eta_1");
    assert_eq!(v["failures"].as_array().unwrap().len(), 1);
}
