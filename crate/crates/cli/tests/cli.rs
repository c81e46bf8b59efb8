use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const E1: &str = r#"{
  "n": 2,
  "rewards": {"type": "independent", "marginals": [
    [{"value": "1", "prob": "1"}],
    [{"value": "0", "prob": "1/2"}, {"value": "2", "prob": "1/2"}]
  ]},
  "constraints": {"type": "matrix", "A": [["1", "1"]], "b": ["1"]}
}"#;

const ZERO: &str = r#"{
  "n": 1,
  "rewards": {"type": "independent", "marginals": [[{"value": "0", "prob": "1"}]]},
  "constraints": {"type": "matrix", "A": [["1"]], "b": ["1"]}
}"#;

fn prophet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prophet"))
        .args(args)
        .env_remove("PROPHET_LP_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn file(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_e1_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = file(dir.path(), "e1.json", E1);
    let off = prophet(&["solve", &e1, "--mode", "offline"]);
    assert_eq!(off.status.code(), Some(0));
    assert_eq!(stdout(&off).trim(), "3/2");
    let on = prophet(&["solve", &e1, "--mode", "online"]);
    assert_eq!(stdout(&on).trim(), "1");
}

#[test]
fn solve_zero_rewards_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let z = file(dir.path(), "z.json", ZERO);
    let dump = dir.path().join("dump.json");
    let out = prophet(&["solve", &z, "--dump", dump.to_str().unwrap()]);
    assert_eq!(stdout(&out).trim(), "0");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dump).unwrap()).unwrap();
    assert_eq!(doc[0]["profile"][0], "0");
}

#[test]
fn check_scales_on_e1() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = file(dir.path(), "e1.json", E1);
    for s in ["1/2", "0"] {
        let out = prophet(&["check", &e1, "--scale", s]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        assert!(text.contains("checks agree"));
        assert!(text.lines().any(|l| l == "Implementable"), "{text}");
    }
    let out = prophet(&["check", &e1, "--scale", "1"]);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "NotImplementable"), "{text}");
    assert!(text.contains("stage 2: reward 2 needs Q = 1 but h = 1/2"), "{text}");
}

#[test]
fn check_interim_file() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = file(dir.path(), "e1.json", E1);
    let q = file(
        dir.path(),
        "q.json",
        r#"{"interim": [[{"value": "1", "level": "1/4"}],
                        [{"value": "0", "level": "0"}, {"value": "2", "level": "3/4"}]]}"#,
    );
    let text = stdout(&prophet(&["check", &e1, "--interim", &q]));
    assert!(text.lines().any(|l| l == "Implementable"), "{text}");
    let q = file(
        dir.path(),
        "q2.json",
        r#"{"interim": [[{"value": "1", "level": "1/2"}],
                        [{"value": "0", "level": "0"}, {"value": "2", "level": "3/4"}]]}"#,
    );
    let text = stdout(&prophet(&["check", &e1, "--interim", &q]));
    assert!(text.lines().any(|l| l == "NotImplementable"), "{text}");
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = file(dir.path(), "bad.json", &E1.replace("\"n\": 2,", "\"n\": 2, \"x\": 0,"));
    let out = prophet(&["solve", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    let float = file(dir.path(), "f.json", &E1.replace("\"1/2\"", "\"0.5\""));
    assert_eq!(prophet(&["solve", &float]).status.code(), Some(2));
    assert_eq!(prophet(&["solve", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(prophet(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(prophet(&["verify", "--law", "nope"]).status.code(), Some(2));
}

#[test]
fn budget_refusal_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = file(dir.path(), "e1.json", E1);
    let out = Command::new(env!("CARGO_BIN_EXE_prophet"))
        .args(["solve", &e1])
        .env("PROPHET_LP_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_writes_deterministic_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = prophet(&[
            "verify", "--law", "k", "--trials", "12", "--seed", "7", "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        (
            fs::read_to_string(out_dir.join("report.json")).unwrap(),
            fs::read_to_string(out_dir.join("report.txt")).unwrap(),
        )
    };
    let (json_a, table_a) = run("a");
    let (json_b, table_b) = run("b");
    assert_eq!(json_a, json_b);
    assert_eq!(table_a, table_b);
    assert!(table_a.starts_with("law\tseed\tn\tkind\tK\tZ_off\tZ_on\tfactor\tmargin\tverdict\n"));
    assert_eq!(table_a.lines().count(), 14);
}

#[test]
fn verify_zero_trials() {
    let dir = tempfile::tempdir().unwrap();
    let out = prophet(&[
        "verify", "--law", "lemmas234", "--trials", "0", "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(doc["trials"].as_array().unwrap().len(), 0);
}

#[test]
fn generate_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    for (name, flags) in [
        ("matrix", &["--kind", "matrix"][..]),
        ("online", &["--kind", "online-polymatroid"][..]),
        ("joint", &["--kind", "matrix", "--joint"][..]),
    ] {
        let path = dir.path().join(format!("{name}.json"));
        let mut args = vec!["generate", "--seed", "42"];
        args.extend(flags);
        let printed = stdout(&prophet(&args));
        args.extend(["--out", path.to_str().unwrap()]);
        assert_eq!(prophet(&args).status.code(), Some(0));
        let first = fs::read_to_string(&path).unwrap();
        assert_eq!(prophet(&args).status.code(), Some(0));
        assert_eq!(fs::read_to_string(&path).unwrap(), first);
        assert_eq!(printed, first);
        assert_eq!(prophet(&["solve", path.to_str().unwrap()]).status.code(), Some(0));
    }
}

#[test]
fn generate_refuses_impossible_params() {
    let out = prophet(&["generate", "--n-min", "3", "--n-max", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
