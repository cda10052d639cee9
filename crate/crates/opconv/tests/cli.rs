//! End-to-end exit-status matrix for the `opconv` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const S: &str = "2\n1.1 0\n0 0.1\n";
const T: &str = "2\n7.17 -4.41\n-4.41 3.13\n";

fn opconv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opconv"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

struct Files {
    dir: tempfile::TempDir,
}

impl Files {
    fn new() -> Self {
        let files = Self {
            dir: tempfile::tempdir().unwrap(),
        };
        files.put("s.txt", S);
        files.put("t.txt", T);
        files
    }

    fn put(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }
}

const QUICK: &[&str] = &["verify", "--seed", "1", "--dims", "2,3", "--trials", "3", "--control-trials", "60"];

#[test]
fn verify_writes_report_and_exits_zero() {
    let f = Files::new();
    let out = opconv(f.path(), &[QUICK, &["--out", "r.json"]].concat());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(f.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], "1");
    assert_eq!(report["config"]["seed"], 1);
    assert_eq!(report["config"]["dims"], serde_json::json!([2, 3]));
    assert_eq!(report["summary"]["ok"], true);
}

#[test]
fn verify_default_output_path() {
    let f = Files::new();
    let out = opconv(f.path(), QUICK);
    assert_eq!(code(&out), 0);
    assert!(f.path().join("opconv-report.json").exists());
}

#[test]
fn verify_json_flag_prints_report() {
    let f = Files::new();
    let out = opconv(f.path(), &[QUICK, &["--json"]].concat());
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["schema_version"], "1");
}

#[test]
fn verify_config_errors_exit_two() {
    let f = Files::new();
    assert_eq!(code(&opconv(f.path(), &["verify", "--trials", "0"])), 2);
    assert_eq!(code(&opconv(f.path(), &["verify", "--dims", "0", "--trials", "1"])), 2);
    assert_eq!(code(&opconv(f.path(), &["verify", "--tol", "-1", "--trials", "1"])), 2);
    assert_eq!(code(&opconv(f.path(), &["verify", "--checks", "bogus", "--trials", "1"])), 2);
    f.put("bad.json", "{\"seed\": ");
    assert_eq!(code(&opconv(f.path(), &["verify", "--config", "bad.json"])), 2);
    assert_eq!(code(&opconv(f.path(), &["verify", "--no-such-flag"])), 2);
}

#[test]
fn verify_io_errors_exit_three() {
    let f = Files::new();
    assert_eq!(code(&opconv(f.path(), &["verify", "--config", "missing.json"])), 3);
    let out = opconv(f.path(), &[QUICK, &["--out", "no/such/dir/r.json"]].concat());
    assert_eq!(code(&out), 3);
}

#[test]
fn verify_config_file_with_overrides() {
    let f = Files::new();
    f.put(
        "c.json",
        r#"{"seed": 9, "dims": [2], "trials_per_check": 2, "checks": ["trace_switch"], "control_trials": 40}"#,
    );
    let out = opconv(f.path(), &["verify", "--config", "c.json", "--seed", "11", "--out", "r.json"]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(f.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 11);
    assert_eq!(report["checks"][0]["check_id"], "trace_switch");
    assert_eq!(report["checks"][0]["trials"], 2);
}

#[test]
fn verify_twice_same_body() {
    let f = Files::new();
    let body = |name: &str| {
        assert_eq!(code(&opconv(f.path(), &[QUICK, &["--out", name]].concat())), 0);
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(f.path().join(name)).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timing");
        v["config"]["output"] = Value::Null;
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(body("a.json"), body("b.json"));
}

#[test]
fn counterexample_reproduces() {
    let f = Files::new();
    let out = opconv(f.path(), &["counterexample"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("1.858348"), "{text}");
    assert!(text.contains("0.578642"), "{text}");
    assert!(text.contains("-0.015982"), "{text}");
    assert_eq!(out.stdout, opconv(f.path(), &["counterexample"]).stdout);

    let out = opconv(f.path(), &["counterexample", "--json", "--out", "ce.json"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["reproduced"], true);
    assert_eq!(v["outcome"]["verdict"], "Fail");
    assert!((v["s_geo_t"][0][0][0].as_f64().unwrap() - 1.85834).abs() <= 1e-4);
    assert!(f.path().join("ce.json").exists());
}

#[test]
fn check_f_mean_equal_inputs() {
    let f = Files::new();
    let out = opconv(f.path(), &["check", "f_mean_inequality", "--f", "resolvent:1.0", "--x", "t.txt", "--y", "t.txt"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_ne!(v["verdict"], "Fail");
    assert!(v["margin"].as_f64().unwrap().abs() <= 1e-12 * v["scale"].as_f64().unwrap().max(1.0));
}

/// `phi(X ! Y) <= phi(X) ! phi(Y)` for the uniform state, from explicit
/// 2x2 inverses.
fn harmonic_state_gap() -> f64 {
    let inv = |[a, b, c]: [f64; 3]| {
        let det = a * c - b * b;
        [c / det, -b / det, a / det]
    };
    let s = [1.1, 0.0, 0.1];
    let t = [7.17, -4.41, 3.13];
    let (si, ti) = (inv(s), inv(t));
    let h = inv([si[0] + ti[0], si[1] + ti[1], si[2] + ti[2]]);
    let lhs = (2.0 * h[0] + 2.0 * h[2]) / 2.0;
    let (a, b) = ((s[0] + s[2]) / 2.0, (t[0] + t[2]) / 2.0);
    2.0 * a * b / (a + b) - lhs
}

#[test]
fn check_harmonic_on_fixed_pair() {
    let f = Files::new();
    let gap = harmonic_state_gap();
    assert!(gap > 0.0);
    let out = opconv(
        f.path(),
        &["check", "harmonic_subadditivity", "--map", "state:uniform", "--x", "s.txt", "--y", "t.txt"],
    );
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "Pass");
    assert!((v["details"]["outer.margin"].as_f64().unwrap() - gap).abs() <= 1e-10, "{v}");
}

#[test]
fn check_geometric_path_fails_with_exit_one() {
    let f = Files::new();
    let out = opconv(f.path(), &["check", "geometric_path", "--g", "power:0.5", "--x", "s.txt", "--y", "t.txt"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["verdict"], "Fail");
}

#[test]
fn check_accepts_prefixed_ids_and_seed() {
    let f = Files::new();
    let out = opconv(
        f.path(),
        &[
            "check",
            "check_main_convexity",
            "--f",
            "resolvent:0.5",
            "--g",
            "log",
            "--map",
            "congruence_sum:k=2;seed=9",
            "--x",
            "s.txt",
            "--y",
            "t.txt",
            "--seed",
            "17",
        ],
    );
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["check_id"], "main_convexity");
    assert_eq!(v["instance_seed"], 17);
}

#[test]
fn check_parse_errors_exit_two() {
    let f = Files::new();
    f.put("bad.txt", "2\n1 0\n");
    let run = |args: &[&str]| code(&opconv(f.path(), args));
    assert_eq!(run(&["check", "f_mean_inequality", "--f", "resolvent:1", "--x", "bad.txt", "--y", "t.txt"]), 2);
    assert_eq!(run(&["check", "f_mean_inequality", "--f", "cosine", "--x", "s.txt", "--y", "t.txt"]), 2);
    assert_eq!(run(&["check", "f_mean_inequality", "--x", "s.txt", "--y", "t.txt"]), 2);
    assert_eq!(run(&["check", "no_such_check", "--x", "s.txt"]), 2);
    assert_eq!(run(&["check", "harmonic_subadditivity", "--map", "warp:3", "--x", "s.txt", "--y", "t.txt"]), 2);
    // log is not decreasing: the class gate rejects it.
    assert_eq!(run(&["check", "main_convexity", "--f", "log", "--g", "log", "--x", "s.txt", "--y", "t.txt"]), 2);
    assert_eq!(run(&["check", "f_mean_inequality", "--f", "resolvent:1", "--x", "missing.txt", "--y", "t.txt"]), 3);
}

#[test]
fn check_trace_switch_and_derivatives() {
    let f = Files::new();
    f.put("y.txt", "2\n0.3 0.1-0.2j\n0.1+0.2j -0.5\n");
    let out = opconv(f.path(), &["check", "trace_switch", "--h", "log", "--x", "s.txt", "--y", "t.txt"]);
    assert_eq!(code(&out), 0);
    let out = opconv(f.path(), &["check", "resolvent_derivatives", "--shift", "2", "--x", "t.txt", "--y", "y.txt"]);
    assert_eq!(code(&out), 0);
    assert!(stdout_json(&out)["details"]["first.relative_error"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn check_lieb_joint_and_separate() {
    let f = Files::new();
    f.put("y.txt", "2\n0.3 0.1-0.2j\n0.1+0.2j -0.5\n");
    f.put("k.txt", "2\n1 0.5\n-0.2 0.8+0.1j\n");
    let lieb = opconv(
        f.path(),
        &[
            "check", "lieb_convexity", "--f1", "resolvent:0.5", "--f2", "resolvent:2", "--x", "t.txt", "--y", "y.txt",
            "--x2", "s.txt", "--k", "k.txt",
        ],
    );
    assert_eq!(code(&lieb), 0, "{}", String::from_utf8_lossy(&lieb.stderr));
    let joint = opconv(
        f.path(),
        &[
            "check", "joint_convexity", "--f1", "resolvent:1", "--f2", "power:-0.5", "--x", "s.txt", "--y", "t.txt",
            "--x2", "t.txt", "--y2", "s.txt", "--tau", "2",
        ],
    );
    assert_eq!(code(&joint), 0);
    let separate = opconv(
        f.path(),
        &[
            "check", "separate_convexity", "--f1", "resolvent:1", "--f2", "resolvent:0.5", "--g", "power:0.5",
            "--anchor", "s.txt", "--x", "s.txt", "--y", "t.txt", "--fixed", "second",
        ],
    );
    assert_eq!(code(&separate), 0);
}

#[test]
fn help_and_version_exit_zero() {
    let f = Files::new();
    assert_eq!(code(&opconv(f.path(), &["--help"])), 0);
    assert_eq!(code(&opconv(f.path(), &["--version"])), 0);
    assert_eq!(code(&opconv(f.path(), &[])), 2);
}
