use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hecke_signs::coeffs::{read_cache, FormSpec};
use hecke_signs::cli::store::cache_path;
use serde_json::Value;

fn hsgn(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsgn"))
        .args(args)
        .env("HSGN_CACHE_DIR", cache)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_coeffs_is_idempotent_and_decodes() {
    let dir = tempfile::tempdir().unwrap();
    let first = hsgn(dir.path(), &["gen-coeffs", "--limit", "100000"]);
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).starts_with("built"));
    let path = cache_path(dir.path(), &FormSpec::delta(), 100_000);
    let stamp = fs::metadata(&path).unwrap().modified().unwrap();
    let second = hsgn(dir.path(), &["gen-coeffs", "--limit", "100000"]);
    assert_eq!(second.status.code(), Some(0));
    assert!(stdout(&second).starts_with("reused"));
    assert_eq!(fs::metadata(&path).unwrap().modified().unwrap(), stamp);

    let t = read_cache(&path).unwrap();
    let want = -24.0 / 2f64.powf(5.5);
    assert!((t.lambda(2).unwrap() - want).abs() <= 1e-15);
}

#[test]
fn truncated_cache_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hsgn(dir.path(), &["gen-coeffs", "--form", "cm", "--limit", "5000"]).status.code(), Some(0));
    let path = cache_path(dir.path(), &FormSpec::cm(), 5000);
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    let o = hsgn(dir.path(), &["gen-coeffs", "--form", "cm", "--limit", "5000"]);
    assert_eq!(o.status.code(), Some(74));
    assert!(String::from_utf8_lossy(&o.stderr).contains("corrupt cache"));
    let out = dir.path().join("r.json");
    let o = hsgn(dir.path(), &["run", "cm-density", "--form", "cm", "--X", "5000", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(74));
    assert!(!out.exists());
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chowla.json");
    let o = hsgn(
        dir.path(),
        &["run", "chowla", "--form", "unit", "--X", "5000", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sum=4999"), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["result"]["chowla_sum"], 4999);

    // the constant model violates the Chowla threshold
    let o = hsgn(dir.path(), &["run", "chowla", "--form", "unit", "--X", "5000", "--out", out.to_str().unwrap(), "--assert"]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(hsgn(dir.path(), &["run", "unknown-exp"]).status.code(), Some(64));
    assert_eq!(hsgn(dir.path(), &["run", "chowla", "--X", "5"]).status.code(), Some(64));
    assert_eq!(hsgn(dir.path(), &["frobnicate"]).status.code(), Some(64));
    // the Delta table stops at 2^27
    let o = hsgn(dir.path(), &["run", "sign-stats", "--X", "200000000", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(65), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn reports_are_byte_identical_and_csv_parses() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let o = hsgn(dir.path(), &["run", "scan", "--X", "20000", "--h", "10", "--seed", "3", "--out", a.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        runs.push(fs::read(&a).unwrap());
    }
    assert_eq!(runs[0], runs[1]);

    let c = dir.path().join("s.csv");
    let o = hsgn(
        dir.path(),
        &["run", "st-hist", "--X", "20000", "--format", "csv", "--out", c.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_path(&c).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["schema_version", "experiment", "measurement", "value"]);
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    let mass: f64 = rows
        .iter()
        .filter(|r| r[2].starts_with("result.mass."))
        .map(|r| r[3].parse::<f64>().unwrap())
        .sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn scan_assert_on_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.json");
    let o = hsgn(dir.path(), &["run", "scan", "--assert", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"form":{"kind":"cm","weight":2},"X":3000,"delta":0.1,"gamma":0.5,"h":5.0,"K":10.0,
            "seed":1,"samples":100,"output":null,"format":"json","cache_dir":null}"#,
    )
    .unwrap();
    let out = dir.path().join("r.json");
    let o = hsgn(
        dir.path(),
        &["run", "cm-density", "--config", cfg.to_str().unwrap(), "--X", "4000", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["X"], 4000);
    assert_eq!(v["result"]["p_max"], 4000);
}
