//! End-to-end runs of the `posauction` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_posauction"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("POSAUCTION_JOBS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const LOWER_BOUND: &str = r#"{"ctrs":[1.0,0.01],"valuations":[100.0,1.0],"budgets":[1.01,1.0]}"#;

#[test]
fn eval_gsp_prints_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "i.json", LOWER_BOUND);
    let o = run(&["eval", "--mech", "gsp", "--instance", inst.to_str().unwrap(), "--bids", "1.01,1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("LW = 1.02"), "{text}");
    assert!(text.contains("price/click"));

    let o = run(&[
        "eval", "--mech", "vcg", "--instance", inst.to_str().unwrap(), "--bids", "[1.01,1]", "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"]["sigma"], serde_json::json!([1, 2]));
    assert_eq!(v["outcome"]["payments"][0], serde_json::json!(0.99));
    assert_eq!(v["opt_lw"], serde_json::json!(2.0));
}

#[test]
fn eval_reports_minus_infinity_utility() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "i.json",
        r#"{"ctrs":[1.0,0.1],"valuations":[10.0,9.0],"budgets":[1.0,100.0]}"#,
    );
    let o = run(&[
        "eval", "--mech", "gsp", "--instance", inst.to_str().unwrap(), "--bids", "10,9", "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"]["utilities"][0], serde_json::json!("-inf"));
    assert_eq!(v["no_over"], serde_json::json!([false, true]));
}

#[test]
fn eval_csv_has_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "i.json", LOWER_BOUND);
    let o = run(&[
        "eval", "--mech", "egfp", "--instance", inst.to_str().unwrap(), "--bids", "1.001,0;1,0", "--csv",
    ]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("player,position,bid,payment,utility,lw_contrib"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "i.json", LOWER_BOUND);
    let i = inst.to_str().unwrap();
    assert_eq!(run(&["verify", "--mech", "gsp", "--instance", i, "--bids", "1.01,1"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--mech", "gsp", "--instance", i, "--bids", "0.5,1"]).status.code(), Some(1));
    // violates no-over
    assert_eq!(run(&["verify", "--mech", "gsp", "--instance", i, "--bids", "2,1"]).status.code(), Some(2));
    // wrong shape for the mechanism
    assert_eq!(run(&["verify", "--mech", "egfp", "--instance", i, "--bids", "1,1"]).status.code(), Some(2));
    // malformed instance
    let bad = write(dir.path(), "bad.json", r#"{"ctrs":[0.5,1.0],"valuations":[1,1],"budgets":[1,1]}"#);
    let o = run(&["verify", "--mech", "gsp", "--instance", bad.to_str().unwrap(), "--bids", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let o = run(&["verify", "--mech", "egfp", "--instance", i, "--bids", "1.000001,0;1,0", "--theta", "1e-6", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["is_equilibrium"], serde_json::json!(true));
}

#[test]
fn lpoa_single_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "i.json", LOWER_BOUND);
    let o = run(&["lpoa", "--mech", "gsp", "--instance", inst.to_str().unwrap(), "--grid", "21", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lpoa = v["lpoa"].as_f64().unwrap();
    assert!((lpoa - 2.0 / 1.02).abs() < 1e-9, "{lpoa}");

    let one = write(dir.path(), "one.json", r#"{"ctrs":[0.7],"valuations":[3.0],"budgets":[1.0]}"#);
    for mech in ["gsp", "vcg", "egfp"] {
        let o = run(&["lpoa", "--mech", mech, "--instance", one.to_str().unwrap(), "--json"]);
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["lpoa"], serde_json::json!(1.0), "{mech}");
    }
}

#[test]
fn lpoa_batch_writes_csv_and_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eq.csv");
    let jsonl = dir.path().join("eq.jsonl");
    let o = bin()
        .args(["lpoa", "--mech", "vcg", "--random", "2", "--seeds", "0..4", "--grid", "8", "--json"])
        .args(["--csv", csv.to_str().unwrap(), "--jsonl", jsonl.to_str().unwrap()])
        .env("POSAUCTION_JOBS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);
    let csv_text = std::fs::read_to_string(csv).unwrap();
    assert!(csv_text.starts_with("seed,eq,player,position,bid,payment,utility,lw_contrib\n"));
    let lines = std::fs::read_to_string(jsonl).unwrap();
    assert!(lines.lines().count() > 0);
    for l in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["is_equilibrium"], serde_json::json!(true));
    }
    // rows: one per player per equilibrium
    assert_eq!(csv_text.lines().count() - 1, 2 * lines.lines().count());
}

#[test]
fn theorem1_passes_for_every_mechanism() {
    for mech in ["gsp", "vcg", "egfp"] {
        let o = run(&["theorem1", "--mech", mech, "--lambda", "100", "--eps", "0.01"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let text = stdout(&o);
        assert_eq!(text.matches("[PASS]").count(), 3, "{text}");
        assert!(text.contains("1.96078431"));
    }
}

#[test]
fn gen_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let manifest = dir.path().join("m.json");
    let o = run(&[
        "gen", "--family", "random", "--n", "4", "--seed", "7",
        "-o", out.to_str().unwrap(), "--manifest", manifest.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let inst = posauction::instances::load_instance(&out).unwrap();
    let m: posauction::instances::Manifest =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m.instance().unwrap(), inst);
    assert_eq!(inst.n(), 4);

    let o = run(&["gen", "--family", "theorem1", "--lambda", "10", "--eps", "0.1"]);
    let inst = posauction::instances::parse_instance(&stdout(&o)).unwrap();
    assert_eq!(inst.valuations(), &[10.0, 1.0]);
    assert_eq!(run(&["gen", "--family", "theorem1", "--lambda", "1.5"]).status.code(), Some(2));
}

#[test]
fn help_and_usage() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["lpoa", "--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn eval_vcg_three_players_and_zero_bids() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "i.json",
        r#"{"ctrs":[1.0,0.5,0.2],"valuations":[9.0,8.0,7.0],"budgets":[100.0,100.0,100.0]}"#,
    );
    let i = inst.to_str().unwrap();
    let o = run(&["eval", "--mech", "vcg", "--instance", i, "--bids", "9,8,7", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let p: Vec<f64> = v["outcome"]["payments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (got, want) in p.iter().zip([6.1, 2.1, 0.0]) {
        assert!((got - want).abs() < 1e-12, "{p:?}");
    }

    let o = run(&["eval", "--mech", "gsp", "--instance", i, "--bids", "0,0,0", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"]["payments"], serde_json::json!([0.0, 0.0, 0.0]));
}

#[test]
fn verify_prints_the_breaking_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "i.json", LOWER_BOUND);
    let o = run(&["verify", "--mech", "gsp", "--instance", inst.to_str().unwrap(), "--bids", "0.5,1"]);
    let text = stdout(&o);
    assert!(text.contains("player 1:") && text.contains("rank 1") && text.contains("gain 98"), "{text}");
}
