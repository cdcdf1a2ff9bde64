use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::PrimeEigenvalueTable;
use crate::error::{Error, Result};
use crate::multeval::{density_nonzero, evaluate_window, CoefficientWindow, MultiplicativeSpec};
use crate::sieveweights::{weights_for, SieveParams, WeightWindow};

/// λ, sgn λ, w and w′ over one range.
pub(crate) struct Weighted {
    pub lambda: CoefficientWindow,
    pub weights: WeightWindow,
}

impl Weighted {
    pub fn new(params: &SieveParams, table: &Arc<PrimeEigenvalueTable>, lo: u64, hi: u64) -> Result<Self> {
        let spec = MultiplicativeSpec::hecke_extend(table.clone());
        let lambda = evaluate_window(&spec, lo, hi)?;
        let weights = weights_for(params, &spec, &lambda)?;
        Ok(Weighted { lambda, weights })
    }

    /// (S1, S2) over the closed range [x, x + len].
    pub fn sums(&self, x: u64, len: u64) -> (f64, f64) {
        let i = (x - self.lambda.lo) as usize;
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in i..=i + len as usize {
            let s = self.lambda.signs[k];
            if s != 0 {
                s1 += s as f64 * self.weights.w[k];
                s2 += self.weights.w_prime[k];
            }
        }
        (s1, s2)
    }

    pub fn has_sign_change(&self, x: u64, len: u64) -> bool {
        let i = (x - self.lambda.lo) as usize;
        let signs = &self.lambda.signs[i..=i + len as usize];
        signs.contains(&1) && signs.contains(&-1)
    }
}

/// Window length h·k(X), rounded down.
fn interval_len(table: &PrimeEigenvalueTable, x: u64, h: f64) -> Result<u64> {
    if !(h >= 1.0) {
        return Err(Error::param(format!("h must be at least 1, got {h}")));
    }
    let k = density_nonzero(table, x)?.k;
    Ok((h * k).floor() as u64)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub h: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    /// Lower-bound constant in S2 >= c·h.
    pub c: f64,
    /// Upper-bound constant in |S1| <= C·K·√h.
    #[serde(rename = "C")]
    pub big_c: f64,
    /// Number of sampled x; 0 scans every integer in [X, 2X].
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalScanReport {
    #[serde(rename = "X")]
    pub x: u64,
    pub y: u64,
    pub h: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub seed: u64,
    pub k_density: f64,
    /// Each interval is [x, x + interval_len].
    pub interval_len: u64,
    pub samples: u64,
    pub exhaustive: bool,
    pub frac_s1_small: f64,
    pub frac_s2_large: f64,
    pub frac_certified_sign_change: f64,
    pub certified: u64,
    /// Certified intervals in which no sign change was found.
    pub unsound_certificates: u64,
    /// Smallest C giving frac_s1_small >= 1 - 1/K² on these samples.
    pub empirical_big_c: f64,
    /// Largest c giving frac_s2_large >= 0.9 on these samples.
    pub empirical_c: f64,
}

pub fn interval_scan(
    params: &SieveParams,
    table: &Arc<PrimeEigenvalueTable>,
    opts: &ScanOptions,
) -> Result<IntervalScanReport> {
    let x0 = params.x;
    let len = interval_len(table, x0, opts.h)?;
    if !(opts.big_k > 0.0) {
        return Err(Error::param("K must be positive"));
    }
    let data = Weighted::new(params, table, x0, 2 * x0 + len + 1)?;

    let exhaustive = opts.samples == 0 || opts.samples > x0;
    let xs: Vec<u64> = if exhaustive {
        (x0..=2 * x0).collect()
    } else {
        let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
        (0..opts.samples).map(|_| rng.random_range(x0..=2 * x0)).collect()
    };

    let scale = opts.big_k * opts.h.sqrt();
    let (mut small, mut large, mut certified, mut unsound) = (0u64, 0u64, 0u64, 0u64);
    let mut s1_scaled = Vec::with_capacity(xs.len());
    let mut s2_scaled = Vec::with_capacity(xs.len());
    for &x in &xs {
        let (s1, s2) = data.sums(x, len);
        if s1.abs() <= opts.big_c * scale {
            small += 1;
        }
        if s2 >= opts.c * opts.h {
            large += 1;
        }
        if s1.abs() < s2 {
            certified += 1;
            if !data.has_sign_change(x, len) {
                unsound += 1;
            }
        }
        s1_scaled.push(s1.abs() / scale);
        s2_scaled.push(s2 / opts.h);
    }
    s1_scaled.sort_by(f64::total_cmp);
    s2_scaled.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Ok(IntervalScanReport {
        x: x0,
        y: params.y,
        h: opts.h,
        big_k: opts.big_k,
        c: opts.c,
        big_c: opts.big_c,
        seed: opts.seed,
        k_density: density_nonzero(table, x0)?.k,
        interval_len: len,
        samples: xs.len() as u64,
        exhaustive,
        frac_s1_small: small as f64 / n,
        frac_s2_large: large as f64 / n,
        frac_certified_sign_change: certified as f64 / n,
        certified,
        unsound_certificates: unsound,
        empirical_big_c: quantile(&s1_scaled, 1.0 - 1.0 / (opts.big_k * opts.big_k)),
        empirical_c: quantile(&s2_scaled, 0.1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    #[serde(rename = "X")]
    pub x: u64,
    pub h: f64,
    pub eta: f64,
    pub interval_len: u64,
    /// (1/X) Σ_{X<=x<=2X} S1(x)²
    pub variance: f64,
    pub variance_over_h: f64,
}

/// Mean square of S1(x) over integer x in [X, 2X], requiring h <= X^eta.
pub fn variance_short(
    params: &SieveParams,
    table: &Arc<PrimeEigenvalueTable>,
    h: f64,
    eta: f64,
) -> Result<VarianceReport> {
    let x0 = params.x;
    if h > (x0 as f64).powf(eta) {
        return Err(Error::param(format!("h = {h} exceeds X^{eta} for X = {x0}")));
    }
    let len = interval_len(table, x0, h)?;
    let data = Weighted::new(params, table, x0, 2 * x0 + len + 1)?;
    let total: f64 = (x0..=2 * x0)
        .map(|x| {
            let s1 = data.sums(x, len).0;
            s1 * s1
        })
        .sum();
    let variance = total / x0 as f64;
    Ok(VarianceReport {
        x: x0,
        h,
        eta,
        interval_len: len,
        variance,
        variance_over_h: variance / h,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    #[serde(rename = "X")]
    pub x: u64,
    pub y: u64,
    /// X ∏_{p<=X, λ(p)=0} (1 - 1/p)
    pub normalizer: f64,
    pub m1_wprime: f64,
    pub m2_wprime: f64,
    pub m2_w: f64,
}

/// Normalized first and second moments of w′ and second moment of w over [X, 2X).
pub fn moment_report(params: &SieveParams, table: &Arc<PrimeEigenvalueTable>) -> Result<MomentReport> {
    let x0 = params.x;
    let normalizer = x0 as f64 * density_nonzero(table, x0)?.lower_product;
    let data = Weighted::new(params, table, x0, 2 * x0)?;
    let ww = &data.weights;
    let m1: f64 = ww.w_prime.iter().sum();
    let m2p: f64 = ww.w_prime.iter().map(|v| v * v).sum();
    let m2: f64 = ww.w.iter().map(|v| v * v).sum();
    Ok(MomentReport {
        x: x0,
        y: params.y,
        normalizer,
        m1_wprime: m1 / normalizer,
        m2_wprime: m2p / normalizer,
        m2_w: m2 / normalizer,
    })
}
