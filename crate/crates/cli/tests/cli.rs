use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ltv-rnn"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn")
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const WORKED: &str = r#"{"C": 1.0, "a": 0.6931471805599453, "eps": 0.25}"#;

fn synth(dir: &TempDir, kind: &str, params: &str, out: &str) -> Output {
    put(dir, "p.json", params);
    run(
        dir.path(),
        &[
            "synthesize",
            "--kind",
            kind,
            "--params",
            "p.json",
            "--out",
            out,
        ],
    )
}

fn verify(dir: &TempDir, kind: &str, params: &str, spec: &str, extra: &[&str]) -> Output {
    put(dir, "v.json", params);
    let mut args = vec![
        "verify",
        "--kind",
        kind,
        "--params",
        "v.json",
        "--spec",
        spec,
        "--trials",
        "8",
        "--horizon",
        "48",
        "--seed",
        "42",
    ];
    args.extend_from_slice(extra);
    run(dir.path(), &args)
}

#[test]
fn conv_identity_spec() {
    let dir = TempDir::new().unwrap();
    let out = synth(&dir, "conv", r#"{"taps": [1.0]}"#, "id.json");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let spec: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("id.json")).unwrap()).unwrap();
    assert_eq!(spec["kind"], "conv");
    assert_eq!(spec["network"]["state_dim"], 0);

    fs::write(dir.path().join("x.json"), r#"{"taps": [2.0, -1.0, 3.0]}"#).unwrap();
    let out = run(
        dir.path(),
        &["simulate", "--spec", "id.json", "--input", "x.json"],
    );
    let y = stdout_json(&out);
    let re: Vec<f64> = y["taps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["re"].as_f64().unwrap())
        .collect();
    assert_eq!(re, vec![2.0, -1.0, 3.0]);
}

#[test]
fn quantfir_worked_instance() {
    let dir = TempDir::new().unwrap();
    put(&dir, "q.json", WORKED);
    let out = run(
        dir.path(),
        &[
            "synthesize",
            "--kind",
            "quantfir",
            "--params",
            "q.json",
            "--out",
            "s.json",
            "--qfir",
            "taps.json",
        ],
    );
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["M"], 4);
    assert_eq!(report["delta"], 0.03125);
    assert_eq!(report["total_bits"], 22);
    let taps: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("taps.json")).unwrap()).unwrap();
    assert_eq!(taps["taps"].as_array().unwrap().len(), 4);

    let out = verify(&dir, "quantfir", WORKED, "s.json", &[]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["pass"], true);
}

#[test]
fn rational_with_zero_leading_denominator_fails() {
    let dir = TempDir::new().unwrap();
    let out = synth(
        &dir,
        "rational",
        r#"{"num": [1.0], "den": [0.0, 1.0]}"#,
        "r.json",
    );
    assert!(!out.status.success());
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("b_0"), "{msg}");
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn verify_conv_against_own_kernel() {
    let dir = TempDir::new().unwrap();
    let params = r#"{"taps": [0.5, -1.25, 2.0, 0.75], "c_in": 3.0}"#;
    assert!(synth(&dir, "conv", params, "c.json").status.success());
    let out = verify(&dir, "conv", params, "c.json", &["--out", "report.json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["pass"], true);
    assert!(report["deviation"].as_f64().unwrap() <= 1e-9);
    assert_eq!(report["tolerance"], 1e-9);
    assert_eq!(report["input_bound"], 3.0);
    assert_eq!(report["seed"], 42);
    assert_eq!(report["digests"]["params"].as_str().unwrap().len(), 64);
    let saved: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(saved["deviation"], report["deviation"]);

    // Reports are sorted-key JSON.
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn verify_is_deterministic_given_seed() {
    let dir = TempDir::new().unwrap();
    let params = r#"{"num": [1.0, 0.3], "den": [1.0, -0.5, 0.06]}"#;
    assert!(synth(&dir, "rational", params, "r.json").status.success());
    let a = stdout_json(&verify(&dir, "rational", params, "r.json", &[]));
    let b = stdout_json(&verify(&dir, "rational", params, "r.json", &[]));
    assert_eq!(a["pass"], true);
    assert_eq!(a["deviation"], b["deviation"]);
    assert_eq!(a["digests"], b["digests"]);
}

#[test]
fn freqshift_against_one_hot_spreading() {
    let dir = TempDir::new().unwrap();
    assert!(synth(
        &dir,
        "freqshift",
        r#"{"F": 4, "f": 1, "c_in": 2.0}"#,
        "fs.json"
    )
    .status
    .success());
    let s = r#"{"D": 1, "F": 4, "S": [[{"re": 0, "im": 0}, {"re": 1, "im": 0}, {"re": 0, "im": 0}, {"re": 0, "im": 0}]]}"#;
    let out = verify(&dir, "ltv", s, "fs.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["tolerance"], 1e-8);
    assert_eq!(report["input_bound"], 2.0);

    let out = verify(&dir, "freqshift", r#"{"F": 4, "f": 1}"#, "fs.json", &[]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn ltv_round_trip() {
    let dir = TempDir::new().unwrap();
    let s = r#"{"D": 2, "F": 3, "c_in": 1.5, "S": [
        [{"re": 0.3, "im": -1.1}, {"re": -0.7, "im": 0.2}, {"re": 0.0, "im": 0.5}],
        [{"re": 1.4, "im": 0.5}, {"re": 0.05, "im": -0.9}, {"re": -0.2, "im": 0.0}]]}"#;
    assert!(synth(&dir, "ltv", s, "l.json").status.success());
    let out = verify(&dir, "ltv", s, "l.json", &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn corrupted_spec_fails() {
    let dir = TempDir::new().unwrap();
    let params = r#"{"taps": [1.0, 2.0, 3.0]}"#;
    assert!(synth(&dir, "conv", params, "c.json").status.success());
    let path = dir.path().join("c.json");
    let mut spec: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    spec["network"]["w_out"][1]["re"] = Value::from(2.5);
    fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();

    let out = verify(&dir, "conv", params, "c.json", &[]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["pass"], false);
    assert!(report["deviation"].as_f64().unwrap() > 1e-9);
}

#[test]
fn tolerance_flag_is_honored() {
    let dir = TempDir::new().unwrap();
    let params = r#"{"taps": [1.0, 2.0]}"#;
    assert!(synth(&dir, "conv", params, "c.json").status.success());
    let out = verify(
        &dir,
        "conv",
        r#"{"taps": [1.0, 2.001]}"#,
        "c.json",
        &["--tolerance", "0.01"],
    );
    assert_eq!(out.status.code(), Some(0));
    let out = verify(&dir, "conv", r#"{"taps": [1.0, 2.001]}"#, "c.json", &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn complex_spec_against_real_oracle_is_incompatible() {
    let dir = TempDir::new().unwrap();
    assert!(synth(&dir, "freqshift", r#"{"F": 3, "f": 2}"#, "fs.json")
        .status
        .success());
    let out = verify(&dir, "conv", r#"{"taps": [1.0]}"#, "fs.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("incompatible"));
}

#[test]
fn entropy_table() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "entropy",
            "--C",
            "1",
            "--a",
            "0.6931471805599453",
            "--eps",
            "0.25,1e-2,1e-3,1e-4",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("eps,M,delta,total_bits,chain_bound,main_term,ratio")
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..5], &["0.25", "4", "0.03125", "22", "26.0"]);
    let ratios: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]), "{ratios:?}");

    let out = run(
        dir.path(),
        &[
            "entropy", "--C", "1", "--a", "0.5", "--eps", "0.1", "--format", "json",
        ],
    );
    let rows = stdout_json(&out);
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert!(rows[0]["ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn entropy_empty_list() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["entropy", "--C", "1", "--a", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "eps,M,delta,total_bits,chain_bound,main_term,ratio\n"
    );
    let out = run(
        dir.path(),
        &["entropy", "--C", "1", "--a", "1", "--format", "json"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out), Value::Array(vec![]));
}

#[test]
fn codec_round_trip_is_byte_exact() {
    let dir = TempDir::new().unwrap();
    put(
        &dir,
        "q.json",
        r#"{"C": 1.0, "a": 0.6931471805599453, "eps": 0.25, "impulse": [0.9, -0.4, 0.2, -0.1]}"#,
    );
    let out = run(
        dir.path(),
        &[
            "synthesize",
            "--kind",
            "quantfir",
            "--params",
            "q.json",
            "--out",
            "s.json",
            "--qfir",
            "taps.json",
        ],
    );
    assert!(out.status.success());
    assert!(run(
        dir.path(),
        &["encode", "--qfir", "taps.json", "--out", "b.bin"]
    )
    .status
    .success());
    let container = fs::read(dir.path().join("b.bin")).unwrap();
    assert_eq!(u64::from_le_bytes(container[..8].try_into().unwrap()), 22);
    assert_eq!(container.len(), 8 + 3);
    let out = run(
        dir.path(),
        &[
            "decode",
            "--input",
            "b.bin",
            "--sidecar",
            "b.bin.json",
            "--out",
            "back.json",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read(dir.path().join("taps.json")).unwrap(),
        fs::read(dir.path().join("back.json")).unwrap()
    );
}

#[test]
fn decode_with_mismatched_sidecar_fails() {
    let dir = TempDir::new().unwrap();
    put(&dir, "q.json", WORKED);
    run(
        dir.path(),
        &[
            "synthesize",
            "--kind",
            "quantfir",
            "--params",
            "q.json",
            "--out",
            "s.json",
            "--qfir",
            "t.json",
        ],
    );
    assert!(run(
        dir.path(),
        &["encode", "--qfir", "t.json", "--out", "b.bin"]
    )
    .status
    .success());
    put(
        &dir,
        "bad.json",
        r#"{"C": 1.0, "a": 0.6931471805599453, "eps": 0.1}"#,
    );
    let out = run(
        dir.path(),
        &[
            "decode",
            "--input",
            "b.bin",
            "--sidecar",
            "bad.json",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));
}

#[test]
fn encode_all_zero_taps() {
    let dir = TempDir::new().unwrap();
    put(
        &dir,
        "zero.json",
        r#"{"class": {"C": 1.0, "a": 0.6931471805599453}, "eps": 0.25, "M": 4, "delta": 0.03125, "taps": [0.0, 0.0, 0.0, 0.0]}"#,
    );
    let out = run(
        dir.path(),
        &["encode", "--qfir", "zero.json", "--out", "z.bin"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout_json(&out)["bits"], 22);
    let container = fs::read(dir.path().join("z.bin")).unwrap();
    assert_eq!(u64::from_le_bytes(container[..8].try_into().unwrap()), 22);
    assert!(container[8..].iter().all(|b| *b == 0));
}
