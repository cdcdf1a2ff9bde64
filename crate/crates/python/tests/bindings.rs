use hecke_signs_py::{build_table, coefficient_values, experiment_json, form_sign_report};
use pyo3::prelude::*;
use pyo3::types::PyDict;

#[test]
fn tau_through_bindings() {
    let v = coefficient_values("delta", 12, 0).unwrap();
    // λ(n) = τ(n) / n^{11/2}
    let tau = [1.0, -24.0, 252.0, -1472.0, 4830.0, -6048.0, -16744.0, 84480.0, -113643.0, -115920.0, 534612.0, -370944.0];
    for (n, (l, t)) in v.iter().zip(tau).enumerate() {
        let expect = t / ((n + 1) as f64).powf(5.5);
        assert!((l - expect).abs() <= 1e-12 * expect.abs().max(1.0), "n={} {l} {expect}", n + 1);
    }
}

#[test]
fn cm_zero_at_inert_primes() {
    let t = build_table("cm", 100, 0).unwrap();
    for (p, l) in t.primes().iter().zip(t.lambdas()) {
        if *p % 4 == 3 || *p == 2 {
            assert_eq!(*l, 0.0, "p={p}");
        } else {
            assert!(l.abs() > 0.0, "p={p}");
        }
    }
}

#[test]
fn unit_form_signs() {
    let r = form_sign_report("unit", 1000, 0).unwrap();
    assert_eq!((r.n_pos, r.n_neg, r.n_zero, r.sign_changes), (1000, 0, 0, 0));
    assert!(form_sign_report("nope", 10, 0).is_err());
}

#[test]
fn experiment_report_is_json() {
    let dir = tempdir();
    let mut cfg: serde_json::Value = serde_json::from_str(&hecke_signs::cli::config::ExperimentConfig::default().to_json().unwrap()).unwrap();
    cfg["form"]["kind"] = "unit".into();
    cfg["X"] = 5000.into();
    let text = experiment_json("chowla", Some(&cfg.to_string()), Some(dir.clone())).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["experiment"], "chowla");
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["result"]["chowla_sum"], 4999);
    assert!(experiment_json("nope", None, Some(dir.clone())).is_err());
    std::fs::remove_dir_all(dir).ok();
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("hsgn-py-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn module_functions() {
    Python::initialize();
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(hecke_signs_py::hecke_signs_py)(py);
        let m = m.bind(py);
        let names: Vec<String> = m.getattr("experiments").unwrap().call0().unwrap().extract().unwrap();
        assert!(names.iter().any(|n| n == "sign-stats"));

        let r = m.getattr("sign_report").unwrap().call1(("unit", 100u64)).unwrap();
        let r = r.cast::<PyDict>().unwrap();
        let n_pos: u64 = r.get_item("n_pos").unwrap().unwrap().extract().unwrap();
        assert_eq!(n_pos, 100);

        let (primes, lambdas): (Vec<u64>, Vec<f64>) =
            m.getattr("prime_table").unwrap().call1(("delta", 10u64)).unwrap().extract().unwrap();
        assert_eq!(primes, vec![2, 3, 5, 7]);
        assert!((lambdas[0] + 24.0 / 2f64.powf(5.5)).abs() < 1e-15);

        let err = m.getattr("coefficients").unwrap().call1(("bogus", 10u64)).unwrap_err();
        assert!(err.to_string().contains("unknown form"));
    });
}
