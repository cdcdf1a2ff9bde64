use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde_json::{json, Value};

use super::calibration::Constants;
use super::config::ExperimentConfig;
use super::report::{to_value, Check};
use super::store::TableStore;
use crate::coeffs::{FormKind, PrimeEigenvalueTable};
use crate::error::{Error, Result};
use crate::multeval::{evaluate_window, MultiplicativeSpec};
use crate::sieveweights::{wpp_majorant, MAJORANT_WINDOW_LIMIT};
use crate::stats::{
    cor_proof_check, interval_scan, moment_report, prime_moment_checks, satotate_histogram, serre_cm_density,
    shifted_convolution, sign_report, variance_short, CorStatus, ScanOptions, ShiftParams,
};

pub const HISTOGRAM_BINS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SignStats,
    SignChanges,
    Chowla,
    Weights,
    Moments,
    Scan,
    ShiftedConv,
    Variance,
    PrimeChecks,
    StHist,
    CmDensity,
    CorCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Experiment::SignStats,
        Experiment::SignChanges,
        Experiment::Chowla,
        Experiment::Weights,
        Experiment::Moments,
        Experiment::Scan,
        Experiment::ShiftedConv,
        Experiment::Variance,
        Experiment::PrimeChecks,
        Experiment::StHist,
        Experiment::CmDensity,
        Experiment::CorCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SignStats => "sign-stats",
            Experiment::SignChanges => "sign-changes",
            Experiment::Chowla => "chowla",
            Experiment::Weights => "weights",
            Experiment::Moments => "moments",
            Experiment::Scan => "scan",
            Experiment::ShiftedConv => "shifted-conv",
            Experiment::Variance => "variance",
            Experiment::PrimeChecks => "prime-checks",
            Experiment::StHist => "st-hist",
            Experiment::CmDensity => "cm-density",
            Experiment::CorCheck => "cor-check",
        }
    }

    /// Prime table limit the experiment reads at this configuration.
    pub fn table_limit(self, cfg: &ExperimentConfig) -> u64 {
        let x = cfg.x;
        match self {
            Experiment::SignStats
            | Experiment::SignChanges
            | Experiment::Chowla
            | Experiment::PrimeChecks
            | Experiment::StHist
            | Experiment::CmDensity => x,
            Experiment::Weights | Experiment::Moments | Experiment::ShiftedConv => 2 * x + 1,
            Experiment::CorCheck => 2 * x + 2,
            // k(X) < 64 far beyond any reachable X
            Experiment::Scan | Experiment::Variance => 2 * x + 2 * 64 * cfg.h.ceil() as u64 + 2,
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub struct Outcome {
    pub result: Value,
    pub checks: Vec<Check>,
    pub summary: String,
}

fn spec_of(table: &Arc<PrimeEigenvalueTable>) -> MultiplicativeSpec {
    MultiplicativeSpec::hecke_extend(table.clone())
}

pub fn run_experiment(
    exp: Experiment,
    cfg: &ExperimentConfig,
    store: &mut TableStore,
    k: &Constants,
) -> Result<Outcome> {
    cfg.validate()?;
    let table = store.table(&cfg.form, exp.table_limit(cfg))?;
    let x = cfg.x;
    let xf = x as f64;
    let kind = cfg.form.kind;
    let out = match exp {
        Experiment::SignStats | Experiment::SignChanges | Experiment::Chowla => {
            let w = evaluate_window(&spec_of(&table), 1, x + 1)?;
            let r = sign_report(&w)?;
            let nonzero = (r.n_pos + r.n_neg) as f64;
            let (checks, summary) = match exp {
                Experiment::SignStats => {
                    let ratio = r.n_pos as f64 / r.n_neg as f64;
                    let mut c = vec![Check::within("ratio", ratio, 0.95, 1.05)];
                    if kind == FormKind::Delta {
                        c.push(Check::at_most("n_zero", r.n_zero as f64, 0.0));
                    }
                    let s = format!("n_pos={} n_neg={} n_zero={} ratio={ratio:.5}", r.n_pos, r.n_neg, r.n_zero);
                    (c, s)
                }
                Experiment::SignChanges => {
                    let c = if kind == FormKind::Delta {
                        Check::at_least("changes_per_x", r.sign_changes as f64 / xf, 0.1)
                    } else {
                        Check::at_least("changes_per_nonzero", r.sign_changes as f64 / nonzero, 0.05)
                    };
                    let s = format!("sign_changes={} per_nonzero={:.5}", r.sign_changes, r.sign_changes as f64 / nonzero);
                    (vec![c], s)
                }
                _ => (
                    vec![Check::at_most("abs_sum", r.chowla_sum.abs() as f64, 0.5 * xf)],
                    format!("sum={}", r.chowla_sum),
                ),
            };
            Outcome {
                result: to_value(&r)?,
                checks,
                summary,
            }
        }
        Experiment::Weights => {
            let params = cfg.sieve_params()?;
            let hi = (2 * x + 1).min(x + MAJORANT_WINDOW_LIMIT);
            let m = wpp_majorant(&params, &spec_of(&table), x, hi)?;
            let ww = &m.weights;
            let wpp = ww.w_doubleprime.as_deref().unwrap_or_default();
            let result = json!({
                "lo": x,
                "hi": hi,
                "y": params.y,
                "gamma": params.gamma,
                "max_m": params.max_m,
                "r_max": m.r_max,
                "sum_w": ww.w.iter().sum::<f64>(),
                "sum_w_prime": ww.w_prime.iter().sum::<f64>(),
                "sum_w_doubleprime": wpp.iter().sum::<f64>(),
                "sandwich_violations": m.sandwich_violations,
                "domination_violations": m.domination_violations,
            });
            Outcome {
                result,
                checks: vec![
                    Check::at_most("sandwich_violations", m.sandwich_violations as f64, 0.0),
                    Check::at_most("domination_violations", m.domination_violations as f64, 0.0),
                ],
                summary: format!(
                    "n={} sandwich_violations={} domination_violations={}",
                    hi - x,
                    m.sandwich_violations,
                    m.domination_violations
                ),
            }
        }
        Experiment::Moments => {
            let r = moment_report(&cfg.sieve_params()?, &table)?;
            Outcome {
                checks: vec![
                    Check::within("m1_wprime", r.m1_wprime, k.c1, k.c2),
                    Check::at_most("m2_w", r.m2_w, k.big_c2),
                    Check::at_most("m2_wprime_minus_m2_w", r.m2_wprime - r.m2_w * (1.0 + 1e-9), 0.0),
                ],
                summary: format!("m1_wprime={:.6} m2_wprime={:.6} m2_w={:.6}", r.m1_wprime, r.m2_wprime, r.m2_w),
                result: to_value(&r)?,
            }
        }
        Experiment::Scan => {
            let opts = ScanOptions {
                h: cfg.h,
                big_k: cfg.big_k,
                c: k.c,
                big_c: k.big_c,
                samples: cfg.samples,
                seed: cfg.seed,
            };
            let r = interval_scan(&cfg.sieve_params()?, &table, &opts)?;
            Outcome {
                checks: vec![
                    Check::at_least("frac_s1_small", r.frac_s1_small, 1.0 - 1.0 / (cfg.big_k * cfg.big_k)),
                    Check::at_least("certified", r.certified as f64, 1.0),
                    Check::at_most("unsound_certificates", r.unsound_certificates as f64, 0.0),
                ],
                summary: format!(
                    "frac_s1_small={:.4} frac_s2_large={:.4} frac_certified={:.4}",
                    r.frac_s1_small, r.frac_s2_large, r.frac_certified_sign_change
                ),
                result: to_value(&r)?,
            }
        }
        Experiment::Variance => {
            let params = cfg.sieve_params()?;
            let v = variance_short(&params, &table, cfg.h, k.eta)?;
            let mut checks = vec![Check::at_most("variance_over_h", v.variance_over_h, k.variance_c2)];
            let mut result = json!({ "h": to_value(&v)? });
            let mut summary = format!("variance/h={:.6}", v.variance_over_h);
            if 2.0 * cfg.h <= xf.powf(k.eta) {
                let v2 = variance_short(&params, &table, 2.0 * cfg.h, k.eta)?;
                let ratio = v2.variance_over_h / v.variance_over_h;
                checks.push(Check::within("doubling_ratio", ratio, 0.25, 4.0));
                summary.push_str(&format!(" doubling_ratio={ratio:.4}"));
                result["two_h"] = to_value(&v2)?;
            }
            Outcome { result, checks, summary }
        }
        Experiment::ShiftedConv => {
            let w = evaluate_window(&spec_of(&table), 1, 2 * x + 1)?;
            let mut rows = Vec::new();
            let mut checks = Vec::new();
            for h in 0..=3 {
                let r = shifted_convolution(&w, ShiftParams::plain(h), x)?;
                if h == 0 {
                    checks.push(Check::within("diagonal", r.sum, 0.1 * xf, 10.0 * xf));
                } else {
                    checks.push(Check::at_most(&format!("abs_sum_h{h}"), r.sum.abs(), xf.powf(0.9)));
                }
                rows.push(to_value(&r)?);
            }
            let summary = rows
                .iter()
                .map(|r| format!("h={}:{:.1}", r["h"], r["sum"].as_f64().unwrap_or(f64::NAN)))
                .collect::<Vec<_>>()
                .join(" ");
            Outcome {
                result: Value::Array(rows),
                checks,
                summary,
            }
        }
        Experiment::PrimeChecks => {
            let mut ys: Vec<u64> = [1_000, 10_000, 100_000].into_iter().filter(|y| 2 * y <= x).collect();
            if ys.is_empty() {
                ys.push(x / 2);
            }
            let pairs: Vec<(u64, u64)> = if x > 100 { vec![(100, x)] } else { vec![] };
            let mut rows = Vec::new();
            let mut checks = Vec::new();
            for (i, &y) in ys.iter().enumerate() {
                let r = prime_moment_checks(&table, y, if i == 0 { &pairs } else { &[] })?;
                checks.push(Check::at_least(&format!("large_sum_y{y}"), r.large_sum, r.threshold));
                if i == 0 {
                    checks.push(Check::at_most("grid_violations", r.grid_violations as f64, 0.0));
                    for p in &r.pairs {
                        checks.push(Check::at_most(&format!("pair_{}_{}", p.w, p.z), p.difference.abs(), 5.0));
                    }
                }
                rows.push(to_value(&r)?);
            }
            let passed = checks.iter().filter(|c| c.passed).count();
            Outcome {
                result: Value::Array(rows),
                summary: format!("{passed}/{} checks hold", checks.len()),
                checks,
            }
        }
        Experiment::StHist => {
            let r = satotate_histogram(&table, x, HISTOGRAM_BINS)?;
            let mut checks = Vec::new();
            match kind {
                FormKind::SatoTateSynthetic => checks.push(Check::at_most("discrepancy", r.discrepancy, 0.01)),
                FormKind::Delta => checks.push(Check::within("negative_fraction", r.negative_fraction, 0.45, 0.55)),
                _ => {}
            }
            Outcome {
                summary: format!("discrepancy={:.5} negative_fraction={:.5}", r.discrepancy, r.negative_fraction),
                result: to_value(&r)?,
                checks,
            }
        }
        Experiment::CmDensity => {
            let r = serre_cm_density(&table, x)?;
            Outcome {
                checks: vec![Check::at_most("abs_difference", r.difference.abs(), 1.5)],
                summary: format!(
                    "vanishing_sum={:.6} reference={:.6} difference={:.6}",
                    r.vanishing_sum, r.reference, r.difference
                ),
                result: to_value(&r)?,
            }
        }
        Experiment::CorCheck => {
            let r = cor_proof_check(&spec_of(&table), x)?;
            let failures = (r.multiplicativity_failures + r.disjunction_failures) as f64;
            let mut checks = vec![Check::at_most("failures", failures, 0.0)];
            if r.status == CorStatus::NotFound {
                checks.push(Check::at_least("found", 0.0, 1.0));
            }
            Outcome {
                summary: format!("status={:?} b={:?} j={:?} checked={}", r.status, r.b, r.j, r.checked),
                result: to_value(&r)?,
                checks,
            }
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::calibration::Calibration;
    use crate::coeffs::FormSpec;

    #[test]
    fn names_roundtrip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!(matches!("nope".parse::<Experiment>(), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn small_runs() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = TableStore::new(dir.path());
        let k = Calibration::bundled().unwrap().constants;
        let cfg = ExperimentConfig {
            x: 20_000,
            h: 10.0,
            samples: 200,
            ..Default::default()
        };
        for e in Experiment::ALL {
            let out = run_experiment(e, &cfg, &mut store, &k).unwrap();
            assert!(!out.summary.is_empty() && !out.checks.is_empty(), "{e}");
        }
        let unit = ExperimentConfig {
            form: FormSpec::new(FormKind::Unit),
            x: 1000,
            ..cfg
        };
        let out = run_experiment(Experiment::Chowla, &unit, &mut store, &k).unwrap();
        assert_eq!(out.summary, "sum=999");
    }
}
