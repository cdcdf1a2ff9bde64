use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.1;

/// γ = 2^(-1/100).
pub fn default_gamma() -> f64 {
    (-0.01f64 * std::f64::consts::LN_2).exp()
}

/// Sieve level y = ⌊X^δ⌋ and the schedule y_m = y^((1-γ²)γ^(m-1)/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SieveParams {
    pub x: u64,
    pub delta: f64,
    pub y: u64,
    pub gamma: f64,
    /// Largest m with y_m >= 2; zero when even y_1 < 2.
    pub max_m: u32,
}

impl SieveParams {
    pub fn new(x: u64, delta: f64, gamma: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::param(format!("delta = {delta} not in (0, 1/2)")));
        }
        let y = floor_power(x, delta);
        let mut p = Self::from_y(y, gamma)?;
        p.x = x;
        p.delta = delta;
        Ok(p)
    }

    pub fn with_defaults(x: u64) -> Result<Self> {
        Self::new(x, DEFAULT_DELTA, default_gamma())
    }

    /// Parameters fixed by y alone; `x` is set to y and `delta` to 1.
    pub fn from_y(y: u64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::param(format!("gamma = {gamma} not in (0, 1)")));
        }
        if y < 2 {
            return Err(Error::param(format!("sieve level y = {y} is below 2")));
        }
        let mut p = SieveParams {
            x: y,
            delta: 1.0,
            y,
            gamma,
            max_m: 0,
        };
        while p.y_m(p.max_m + 1) >= 2.0 {
            p.max_m += 1;
        }
        Ok(p)
    }

    pub fn exponent(&self, m: u32) -> f64 {
        0.5 * (1.0 - self.gamma * self.gamma) * self.gamma.powi(m as i32 - 1)
    }

    /// y_m for any m >= 1, including past `max_m`.
    pub(crate) fn y_m(&self, m: u32) -> f64 {
        (self.exponent(m) * (self.y as f64).ln()).exp()
    }

    /// Cap on the largest prime of a 𝒟⁺ element.
    pub fn y1(&self) -> f64 {
        self.y_m(1)
    }
}

/// y_m for 1 <= m <= max_m.
pub fn ym_schedule(params: &SieveParams, m: u32) -> Result<f64> {
    if m == 0 || m > params.max_m {
        return Err(Error::param(format!(
            "schedule index {m} outside 1..={}",
            params.max_m
        )));
    }
    Ok(params.y_m(m))
}

/// ⌊x^δ⌋, corrected so that integer powers land exactly.
fn floor_power(x: u64, delta: f64) -> u64 {
    let target = delta * (x as f64).ln();
    let mut y = target.exp().round() as u64;
    while y > 1 && (y as f64).ln() > target + 1e-12 {
        y -= 1;
    }
    while ((y + 1) as f64).ln() <= target + 1e-12 {
        y += 1;
    }
    y
}
