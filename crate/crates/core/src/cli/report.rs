use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::config::{ExperimentConfig, OutputFormat};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One threshold comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("<= {bound}"),
            passed: value <= bound,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!(">= {bound}"),
            passed: value >= bound,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub result: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub summary: String,
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Serde(e.to_string()))
}

impl Report {
    pub fn new(experiment: &str, config: &ExperimentConfig, result: Value, checks: Vec<Check>, summary: String) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            config: config.clone(),
            passed: checks.iter().all(|c| c.passed),
            result,
            checks,
            summary,
        }
    }

    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> Result<String> {
        // serde_json's map is ordered by key, so a round trip through Value sorts
        let v = to_value(self)?;
        let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Serde(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// One record per scalar measurement: experiment, measurement path, value.
    pub fn to_csv(&self) -> Result<String> {
        let mut rows = Vec::new();
        flatten("result", &self.result, &mut rows);
        for c in &self.checks {
            rows.push((format!("check.{}", c.name), c.value.to_string()));
            rows.push((format!("check.{}.passed", c.name), c.passed.to_string()));
        }
        rows.push(("passed".into(), self.passed.to_string()));
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Serde(e.to_string());
        w.write_record(["schema_version", "experiment", "measurement", "value"]).map_err(csv_err)?;
        let version = SCHEMA_VERSION.to_string();
        for (k, v) in rows {
            w.write_record([version.as_str(), &self.experiment, &k, &v]).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        let text = self.render(format)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::File::create(path)?.write_all(text.as_bytes())?;
        Ok(())
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.into(), s.clone())),
        Value::Null => out.push((prefix.into(), String::new())),
        other => out.push((prefix.into(), other.to_string())),
    }
}
