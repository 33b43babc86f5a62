//! The `qbcast` binary and its library entry point, end to end.

use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

use qbcast_cli::config::{BlockInput, ComplexInput, GraphInput};
use qbcast_cli::{run_scenario, ModeName, ScenarioConfig, CATALOG};

fn qbcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbcast")).args(args).output().expect("binary runs")
}

fn with_config(text: &str, extra: &[&str]) -> Output {
    let dir = std::env::temp_dir().join(format!("qbcast-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{:x}.toml", text.len() * 7919 + extra.len()));
    std::fs::write(&path, text).unwrap();
    let mut args = vec!["--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    qbcast(&args)
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn summary(out: &Output) -> Value {
    lines(out).pop().unwrap()
}

#[test]
fn broadcast_to_two_receivers() {
    let out = qbcast(&["bbp", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let all = lines(&out);
    let branches: Vec<&Value> = all.iter().filter(|v| v["type"] == "branch").collect();
    assert_eq!(branches.len(), 3);
    for b in branches {
        assert!((b["probability"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(b["passed"], true);
        assert!(b["verdicts"].as_array().unwrap().iter().any(|v| v["name"].as_str().unwrap().contains("overlap")));
    }
    assert_eq!(all[0]["type"], "scenario");
    assert_eq!(summary(&out)["passed"], true);
}

#[test]
fn general_phase_success_probability() {
    let out = with_config("scenario = \"unknown-phase-general\"\nlevels = 8\nvariant = \"destructive\"\nmode = \"enumerate\"\n", &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    let p = summary(&out)["statistics"]["success_probability"].as_f64().unwrap();
    assert!((p - 0.75).abs() < 1e-12);
}

#[test]
fn povm_key_rate() {
    let out = with_config("scenario = \"qkd\"\nrounds = 3000\nstrategy = \"povm\"\nseed = 42\n", &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    let f = summary(&out)["statistics"]["sifted_fraction"].as_f64().unwrap();
    let sigma = (0.25f64 / 3000.0).sqrt();
    assert!((f - 0.5).abs() <= 3.0 * sigma, "fraction {f}");
}

#[test]
fn identical_seeds_give_identical_bytes() {
    for args in [
        vec!["bbp", "--mode", "sample", "--trials", "20", "--seed", "5", "--json"],
        vec!["auth", "--trials", "300", "--seed", "1", "--json", "--verbose-transcript"],
        vec!["mbqc-cnot", "--seed", "3", "--json"],
        vec!["ghz-ring", "--json", "--verbose-transcript"],
    ] {
        let a = qbcast(&args);
        let b = qbcast(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = qbcast(&["qkd", "--trials", "200", "--seed", "1", "--json"]);
    let b = qbcast(&["qkd", "--trials", "200", "--seed", "2", "--json"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn invalid_input_exits_with_two() {
    assert_eq!(qbcast(&["no-such-scenario"]).status.code(), Some(2));
    assert_eq!(qbcast(&[]).status.code(), Some(2));
    assert_eq!(qbcast(&["bbp", "--config", "/nonexistent/file.toml"]).status.code(), Some(2));
    assert_eq!(with_config("scenario = \"bbp\"\ncolour = 1\n", &[]).status.code(), Some(2));
    assert_eq!(with_config("scenario = \"bbp\"\nlevels = 4\n", &[]).status.code(), Some(2));
    assert_eq!(with_config("scenario = \"bbp\"\nalpha = 1.0\nbeta = 1.0\n", &[]).status.code(), Some(2));
    let out = with_config("scenario = \"phase-restricted\"\nlevels = 4\nk = 4\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));
    assert_eq!(qbcast(&["bbp", "--mode", "sometimes"]).status.code(), Some(2));
}

#[test]
fn failing_verdicts_exit_with_one() {
    let mut report = run_scenario(&ScenarioConfig { scenario: Some("ghz-star".into()), ..Default::default() }, false).unwrap();
    assert_eq!(report.exit_code(), 0);
    report.records[0].verdicts[0].value = -1.0;
    assert_eq!(report.exit_code(), 1);
    let last: Value = serde_json::from_str(report.to_json_lines().lines().last().unwrap()).unwrap();
    assert_eq!(last["passed"], false);
    assert_eq!(last["failed_records"], 1);
}

#[test]
fn catalog_listing() {
    let out = qbcast(&["--list", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let entries = lines(&out);
    assert!(entries.len() >= 17);
    assert_eq!(entries.len(), CATALOG.len());
    for e in &entries {
        assert!(!e["topics"].as_array().unwrap().is_empty());
    }
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let out = qbcast(&["phase-approx", "--json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let fidelity = text.split("\"encoding_fidelity\":").nth(1).unwrap();
    let mantissa = fidelity.split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{mantissa}");
}

fn complex() -> impl Strategy<Value = ComplexInput> {
    prop_oneof![
        (-1.0f64..1.0).prop_map(ComplexInput::Real),
        ((-1.0f64..1.0), (-1.0f64..1.0)).prop_map(|(a, b)| ComplexInput::Pair([a, b])),
    ]
}

fn config() -> impl Strategy<Value = ScenarioConfig> {
    let names: Vec<&'static str> = CATALOG.iter().map(|s| s.name).collect();
    (
        prop::sample::select(names),
        prop::option::of(prop_oneof![Just(ModeName::Enumerate), Just(ModeName::Sample)]),
        prop::option::of(any::<u64>()),
        prop::option::of(complex()),
        prop::option::of(prop::collection::vec(-10.0f64..10.0, 0..4)),
        prop::option::of((1usize..7, prop::collection::vec((1usize..7, 1usize..7), 0..6))),
        prop::option::of(prop::collection::vec("[+-][IXYZ]{1,4}", 0..3)),
        prop::option::of(prop::collection::vec((0usize..8, -3.0f64..3.0), 0..3)),
        prop::option::of(any::<[bool; 4]>()),
    )
        .prop_map(|(name, mode, seed, alpha, thetas, graph, stabilizers, angles, flags)| ScenarioConfig {
            scenario: Some(name.into()),
            mode,
            seed,
            alpha,
            thetas,
            graph: graph.map(|(n, e)| GraphInput { vertices: n, edges: e.into_iter().map(|(a, b)| [a, b]).collect() }),
            stabilizers,
            angles,
            input_flags: flags,
            blocks: Some(vec![BlockInput { kind: "rotation".into(), top: Some([0.1, 0.2, 0.3]), bottom: None }]),
            ..Default::default()
        })
}

proptest! {
    #[test]
    fn configs_survive_a_round_trip(cfg in config()) {
        let text = cfg.to_toml().unwrap();
        prop_assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), cfg);
    }
}
