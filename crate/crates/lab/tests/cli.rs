use std::io::Write;
use std::process::{Command, Output, Stdio};

use distortion_lab::io::{read_instance, write_instance};
use distortion_core::generators::gen_example2_line_iid;
use distortion_core::metric::line_to_instance;
use serde_json::Value;

fn lab(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_distortion-lab"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).unwrap()
}

#[test]
fn gen_then_eval_example2() {
    let inst = lab(&["gen", "--family", "example2", "--eps", "1e-4"], "");
    assert_eq!(inst.status.code(), Some(0));
    let report = lab(&["eval"], &stdout(&inst));
    assert_eq!(report.status.code(), Some(0));
    let expected = json(&report)["expected"].as_f64().unwrap();
    assert!((expected - 1.17157).abs() < 1e-3);
}

#[test]
fn both_encodings_of_a_line_agree() {
    let line = gen_example2_line_iid(1e-3).unwrap();
    let as_line = lab(&["eval"], &distortion_lab::io::write_line(&line));
    let as_metric = lab(&["eval"], &write_instance(&line_to_instance(&line)));
    let a = json(&as_line)["expected"].as_f64().unwrap();
    let b = json(&as_metric)["expected"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn pairs_are_suppressed_for_large_instances() {
    let inst = stdout(&lab(&["gen", "--family", "simplex", "--n", "80"], ""));
    assert!(json(&lab(&["eval"], &inst)).get("pairs").is_none());
    assert!(json(&lab(&["eval", "--pairs"], &inst)).get("pairs").is_some());
    let small = stdout(&lab(&["gen", "--family", "simplex", "--n", "20"], ""));
    assert!(json(&lab(&["eval"], &small)).get("pairs").is_some());
}

#[test]
fn files_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.json");
    let p = path.to_str().unwrap();
    let gen = lab(&["gen", "--family", "random-line", "--n", "8", "--seed", "5", "--out", p], "");
    assert_eq!(gen.status.code(), Some(0));
    assert!(stdout(&gen).is_empty());

    let reduced = dir.path().join("reduced.json");
    let r = lab(&["reduce", p, "--out", reduced.to_str().unwrap()], "");
    assert_eq!(r.status.code(), Some(0));
    for line in stdout(&r).lines() {
        let step: Value = serde_json::from_str(line).unwrap();
        assert!(step["lemma"].is_string() && step["support"].is_u64() && step["distortion"].is_f64());
    }
    let result = read_instance(&std::fs::read_to_string(&reduced).unwrap()).unwrap();
    assert!(result.to_instance().len() <= 3);

    let out = dir.path().join("best.json");
    let trace = dir.path().join("trace.jsonl");
    let s = lab(
        &[
            "search", "--space", "metric-pq-equal", "--n", "6", "--restarts", "3", "--steps", "200",
            "--seed", "4", "--out", out.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(s.status.code(), Some(0));
    let summary = json(&s);
    assert_eq!(summary["conjecture"].as_f64(), Some(1.5));
    let best = read_instance(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let eval = lab(&["eval", out.to_str().unwrap()], "");
    assert_eq!(json(&eval)["expected"], summary["best_value"]);
    assert!(best.to_instance().len() <= 6);
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 3);
}

#[test]
fn verbs_are_deterministic() {
    let args = ["search", "--space", "line-pq-equal", "--n", "5", "--restarts", "4", "--steps", "300", "--seed", "9"];
    assert_eq!(lab(&args, "").stdout, lab(&args, "").stdout);
    let sweep = ["sweep", "--family", "simplex", "--param", "n", "--values", "10,100"];
    let a = lab(&sweep, "");
    assert_eq!(a.stdout, lab(&sweep, "").stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().next(), Some("param,expected,max_pairwise"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn thread_count_does_not_change_output() {
    let inst = stdout(&lab(&["gen", "--family", "random-metric", "--n", "40", "--seed", "2"], ""));
    let run = |threads: &str| {
        let mut child = Command::new(env!("CARGO_BIN_EXE_distortion-lab"))
            .arg("eval")
            .env("DISTORTION_LAB_THREADS", threads)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(inst.as_bytes()).unwrap();
        child.wait_with_output().unwrap().stdout
    };
    assert_eq!(run("1"), run("4"));
    assert_eq!(run("1"), run("0"));
}

#[test]
fn verify_accepts_generator_output() {
    for args in [
        vec!["gen", "--family", "example1"],
        vec!["gen", "--family", "example2"],
        vec!["gen", "--family", "simplex", "--n", "50"],
        vec!["gen", "--family", "diff-dist"],
        vec!["gen", "--family", "half-mass", "--n", "6"],
        vec!["gen", "--family", "random-line", "--n", "9"],
        vec!["gen", "--family", "random-metric", "--n", "9", "--independent-q"],
    ] {
        let inst = stdout(&lab(&args, ""));
        let v = lab(&["verify"], &inst);
        assert_eq!(v.status.code(), Some(0), "{args:?}: {}", stdout(&v));
        for line in stdout(&v).lines() {
            let check: Value = serde_json::from_str(line).unwrap();
            for key in ["name", "lhs", "rhs", "slack", "pass"] {
                assert!(check.get(key).is_some());
            }
        }
    }
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(lab(&["frobnicate"], "").status.code(), Some(2));
    assert_eq!(lab(&["eval", "--bogus"], "").status.code(), Some(2));
    assert_eq!(lab(&["eval"], "not json").status.code(), Some(2));
    let bad_p = lab(&["eval"], r#"{"distances":[[0,1],[1,0]],"p":[0.5,0.4]}"#);
    assert_eq!(bad_p.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_p.stderr).contains("p:"));
    assert_eq!(lab(&["eval", "/nonexistent/file.json"], "").status.code(), Some(2));
    assert_eq!(lab(&["gen", "--family", "example2", "--eps", "0.5"], "").status.code(), Some(2));
    let metric = stdout(&lab(&["gen", "--family", "example1"], ""));
    assert_eq!(lab(&["reduce"], &metric).status.code(), Some(2));
    assert_eq!(
        lab(&["search", "--space", "line-pq-equal", "--n", "4", "--cooling", "1.5"], "").status.code(),
        Some(2)
    );
}

#[test]
fn degenerate_median_needs_perturbation() {
    let line = r#"{"positions":[0,0.7,1.9,3.3],"p":[0.25,0.25,0.25,0.25]}"#;
    assert_eq!(lab(&["reduce"], line).status.code(), Some(2));
    assert_eq!(lab(&["reduce", "--perturb", "1e-3", "--seed", "1"], line).status.code(), Some(0));
}

#[test]
fn verify_reports_violations_on_non_metrics() {
    let broken = r#"{"distances":[[0,1,100],[1,0,0.01],[100,0.01,0]],"p":[0.5,0.5,0],"q":[0.5,0,0.5]}"#;
    assert_eq!(lab(&["verify"], broken).status.code(), Some(2));
    let v = lab(&["verify", "--allow-nonmetric"], broken);
    assert_eq!(v.status.code(), Some(1));
    let failed: Vec<Value> = stdout(&v)
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|c| c["pass"] == Value::Bool(false))
        .collect();
    assert!(failed.iter().any(|c| c["name"] == "cost_cap"));
}
