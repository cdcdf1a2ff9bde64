use std::fs;
use std::path::Path;
use std::time::SystemTime;

use serde::{Deserialize, Serialize};

use super::store::TableStore;
use crate::coeffs::FormSpec;
use crate::error::{Error, Result};
use crate::sieveweights::SieveParams;
use crate::stats::{interval_scan, moment_report, variance_short, ScanOptions};

pub const CALIBRATION_SCHEMA: u32 = 1;

/// Exponent in the h <= X^eta guard of the variance experiment.
pub const DEFAULT_ETA: f64 = 0.3;

const BUNDLED: &str = include_str!("../../calibration/calibration.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// |S1| <= C·K·√h
    #[serde(rename = "C")]
    pub big_c: f64,
    /// S2 >= c·h
    pub c: f64,
    /// Lower band for the normalized first moment of w′.
    pub c1: f64,
    /// Upper band for the normalized first moment of w′.
    pub c2: f64,
    /// Upper band for the normalized second moment of w.
    #[serde(rename = "C2")]
    pub big_c2: f64,
    /// Upper band for variance / h.
    pub variance_c2: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotPoint {
    #[serde(rename = "X")]
    pub x: u64,
    pub y: u64,
    #[serde(rename = "empirical_C")]
    pub empirical_big_c: f64,
    pub empirical_c: f64,
    pub frac_certified_sign_change: f64,
    pub m1_wprime: f64,
    pub m2_wprime: f64,
    pub m2_w: f64,
    pub variance_over_h: f64,
}

/// Pilot sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub form: FormSpec,
    pub x_values: Vec<u64>,
    pub delta: f64,
    pub gamma: f64,
    pub h: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    pub samples: u64,
    pub seed: u64,
    pub variance_h: f64,
    pub eta: f64,
}

impl Default for Plan {
    fn default() -> Self {
        Plan {
            form: FormSpec::delta(),
            x_values: vec![10_000, 100_000, 1_000_000],
            delta: crate::sieveweights::DEFAULT_DELTA,
            gamma: crate::sieveweights::default_gamma(),
            h: 50.0,
            big_k: 10.0,
            samples: 1000,
            seed: 0,
            variance_h: 10.0,
            eta: DEFAULT_ETA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub schema_version: u32,
    pub generated: String,
    pub plan: Plan,
    pub constants: Constants,
    pub pilot: Vec<PilotPoint>,
}

impl Calibration {
    pub fn bundled() -> Result<Self> {
        Self::from_json(BUNDLED)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Calibration = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        if c.schema_version != CALIBRATION_SCHEMA {
            return Err(Error::Serde(format!("calibration schema {} is not {CALIBRATION_SCHEMA}", c.schema_version)));
        }
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn point(&self, x: u64) -> Option<&PilotPoint> {
        self.pilot.iter().find(|p| p.x == x)
    }
}

/// Runs the pilot sweep and derives the constants with safety margins.
pub fn calibrate(store: &mut TableStore, plan: &Plan) -> Result<Calibration> {
    let mut pilot = Vec::new();
    for &x in &plan.x_values {
        let params = SieveParams::new(x, plan.delta, plan.gamma)?;
        let table = store.table(&plan.form, 2 * x + 64 * plan.h.max(plan.variance_h).ceil() as u64 + 2)?;
        let scan = interval_scan(
            &params,
            &table,
            &ScanOptions {
                h: plan.h,
                big_k: plan.big_k,
                c: 0.0,
                big_c: 0.0,
                samples: plan.samples,
                seed: plan.seed,
            },
        )?;
        let m = moment_report(&params, &table)?;
        let v = variance_short(&params, &table, plan.variance_h, plan.eta)?;
        pilot.push(PilotPoint {
            x,
            y: params.y,
            empirical_big_c: scan.empirical_big_c,
            empirical_c: scan.empirical_c,
            frac_certified_sign_change: scan.frac_certified_sign_change,
            m1_wprime: m.m1_wprime,
            m2_wprime: m.m2_wprime,
            m2_w: m.m2_w,
            variance_over_h: v.variance_over_h,
        });
    }
    let max = |f: fn(&PilotPoint) -> f64| pilot.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let min = |f: fn(&PilotPoint) -> f64| pilot.iter().map(f).fold(f64::INFINITY, f64::min);
    let constants = Constants {
        big_c: 1.1 * max(|p| p.empirical_big_c),
        c: 0.9 * min(|p| p.empirical_c),
        c1: 0.5 * min(|p| p.m1_wprime),
        c2: 2.0 * max(|p| p.m1_wprime),
        big_c2: 2.0 * max(|p| p.m2_w),
        variance_c2: 2.0 * max(|p| p.variance_over_h),
        eta: plan.eta,
    };
    Ok(Calibration {
        schema_version: CALIBRATION_SCHEMA,
        generated: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
        plan: plan.clone(),
        constants,
        pilot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_parses() {
        let c = Calibration::bundled().unwrap();
        assert!(c.constants.c1 > 0.0 && c.constants.big_c > 0.0);
    }

    #[test]
    fn deterministic_constants() {
        let dir = tempfile::tempdir().unwrap();
        let plan = Plan {
            x_values: vec![5_000, 8_000],
            samples: 300,
            seed: 4,
            ..Plan::default()
        };
        let a = calibrate(&mut TableStore::new(dir.path()), &plan).unwrap();
        let b = calibrate(&mut TableStore::new(dir.path()), &plan).unwrap();
        assert_eq!((a.constants.clone(), a.pilot.clone()), (b.constants, b.pilot));
        assert!(a.constants.c1 > 0.0);
        let text = a.to_json().unwrap();
        assert_eq!(Calibration::from_json(&text).unwrap(), a);
    }
}
