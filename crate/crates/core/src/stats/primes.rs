use std::f64::consts::PI;

use serde::Serialize;

use crate::coeffs::PrimeEigenvalueTable;
use crate::error::{Error, Result};

/// Grid size for the polynomial minorant check.
pub const POLY_GRID: usize = 10_000;

fn require_limit(table: &PrimeEigenvalueTable, need: u64) -> Result<()> {
    if need > table.limit {
        return Err(Error::OutOfRange {
            value: need,
            limit: table.limit,
        });
    }
    Ok(())
}

/// Primes in [lo, hi] with their λ.
fn prime_range(table: &PrimeEigenvalueTable, lo: u64, hi: u64) -> impl Iterator<Item = (u64, f64)> + '_ {
    let start = table.primes().partition_point(|&p| p < lo);
    let end = table.primes().partition_point(|&p| p <= hi);
    table.primes()[start..end]
        .iter()
        .copied()
        .zip(table.lambdas()[start..end].iter().copied())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCheck {
    pub w: u64,
    pub z: u64,
    pub sum_lambda_sq: f64,
    pub sum_recip: f64,
    /// Σ|λ(p)|²/p − Σ1/p over w <= p <= z.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeMomentReport {
    pub y: u64,
    /// Σ_{y<=p<=2y, |λ(p)|>=1/2} |λ(p)|
    pub large_sum: f64,
    /// y / (10 log y)
    pub threshold: f64,
    pub large_holds: bool,
    pub pairs: Vec<PairCheck>,
    pub grid_points: usize,
    pub grid_violations: usize,
    /// max over the grid of LHS − RHS; nonpositive when the inequality holds.
    pub max_poly_excess: f64,
}

/// (1/8)(1 + (x²−1) − (x⁴−3x²+1)).
pub fn minorant_lhs(x: f64) -> f64 {
    let x2 = x * x;
    (1.0 + (x2 - 1.0) - (x2 * x2 - 3.0 * x2 + 1.0)) / 8.0
}

pub fn minorant_rhs(x: f64) -> f64 {
    if x.abs() > 0.5 {
        0.5
    } else {
        0.0
    }
}

pub fn prime_moment_checks(table: &PrimeEigenvalueTable, y: u64, pairs: &[(u64, u64)]) -> Result<PrimeMomentReport> {
    if y < 2 {
        return Err(Error::param("y must be at least 2"));
    }
    require_limit(table, 2 * y)?;
    let large_sum = prime_range(table, y, 2 * y)
        .map(|(_, l)| l.abs())
        .filter(|&a| a >= 0.5)
        .fold(0.0, |s, a| s + a);
    let threshold = y as f64 / (10.0 * (y as f64).ln());

    let mut checks = Vec::with_capacity(pairs.len());
    for &(w, z) in pairs {
        require_limit(table, z)?;
        let (mut sq, mut recip) = (0.0, 0.0);
        for (p, l) in prime_range(table, w, z) {
            sq += l * l / p as f64;
            recip += 1.0 / p as f64;
        }
        checks.push(PairCheck {
            w,
            z,
            sum_lambda_sq: sq,
            sum_recip: recip,
            difference: sq - recip,
        });
    }

    let mut violations = 0;
    let mut excess = f64::NEG_INFINITY;
    for i in 0..POLY_GRID {
        let x = -2.0 + 4.0 * i as f64 / (POLY_GRID - 1) as f64;
        let d = minorant_lhs(x) - minorant_rhs(x);
        excess = excess.max(d);
        if d > 0.0 {
            violations += 1;
        }
    }
    Ok(PrimeMomentReport {
        y,
        large_sum,
        threshold,
        large_holds: large_sum >= threshold,
        pairs: checks,
        grid_points: POLY_GRID,
        grid_violations: violations,
        max_poly_excess: excess,
    })
}

/// Semicircle distribution function on [−2, 2].
pub fn semicircle_cdf(t: f64) -> f64 {
    let t = t.clamp(-2.0, 2.0);
    0.5 + t * (4.0 - t * t).sqrt() / (4.0 * PI) + (t / 2.0).asin() / PI
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatoTateHistogram {
    pub p_max: u64,
    pub count: u64,
    pub edges: Vec<f64>,
    /// Empirical mass per bin.
    pub mass: Vec<f64>,
    /// Semicircle mass per bin.
    pub expected: Vec<f64>,
    /// max over bins of |mass − expected|
    pub discrepancy: f64,
    pub negative_fraction: f64,
}

pub fn satotate_histogram(table: &PrimeEigenvalueTable, p_max: u64, bins: usize) -> Result<SatoTateHistogram> {
    require_limit(table, p_max)?;
    if bins == 0 {
        return Err(Error::param("bins must be positive"));
    }
    let width = 4.0 / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| -2.0 + i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    let (mut count, mut negative) = (0u64, 0u64);
    for (_, l) in prime_range(table, 2, p_max) {
        let k = (((l + 2.0) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[k] += 1;
        count += 1;
        if l < 0.0 && !table.is_zero_value(l) {
            negative += 1;
        }
    }
    let mass: Vec<f64> = counts.iter().map(|&c| c as f64 / count.max(1) as f64).collect();
    let expected: Vec<f64> = edges.windows(2).map(|e| semicircle_cdf(e[1]) - semicircle_cdf(e[0])).collect();
    let discrepancy = mass
        .iter()
        .zip(&expected)
        .map(|(m, e)| (m - e).abs())
        .fold(0.0, f64::max);
    Ok(SatoTateHistogram {
        p_max,
        count,
        edges,
        mass,
        expected,
        discrepancy,
        negative_fraction: negative as f64 / count.max(1) as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerreDensity {
    pub p_max: u64,
    /// Σ_{p<=P, λ(p)=0} 1/p
    pub vanishing_sum: f64,
    /// (1/2) log log P
    pub reference: f64,
    pub difference: f64,
}

pub fn serre_cm_density(table: &PrimeEigenvalueTable, p_max: u64) -> Result<SerreDensity> {
    require_limit(table, p_max)?;
    if p_max < 3 {
        return Err(Error::param("P must be at least 3"));
    }
    // folded from +0.0: an empty f64 sum is -0.0
    let vanishing_sum = table.vanishing_primes(p_max).fold(0.0, |s, p| s + 1.0 / p as f64);
    let reference = 0.5 * (p_max as f64).ln().ln();
    Ok(SerreDensity {
        p_max,
        vanishing_sum,
        reference,
        difference: vanishing_sum - reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{cm_prime_table, delta_prime_table, satotate_sample, vanishing_model, DensitySchedule};

    #[test]
    fn minorant_values() {
        assert_eq!(minorant_lhs(0.0), -0.125);
        // maximum 3/8 at x² = 2
        assert!((minorant_lhs(2f64.sqrt()) - 0.375).abs() < 1e-15);
        let r = prime_moment_checks(&delta_prime_table(3000).unwrap(), 1000, &[(100, 3000)]).unwrap();
        assert_eq!(r.grid_violations, 0);
        assert!(r.large_holds);
        assert!(prime_moment_checks(&delta_prime_table(3000).unwrap(), 2000, &[]).is_err());
    }

    #[test]
    fn semicircle() {
        assert_eq!(semicircle_cdf(-2.0), 0.0);
        assert!((semicircle_cdf(2.0) - 1.0).abs() < 1e-15);
        assert!((semicircle_cdf(0.0) - 0.5).abs() < 1e-15);
        // midpoint rule against the density
        let n = 100_000;
        let mid: f64 = (0..n)
            .map(|i| {
                let t = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
                (4.0 - t * t).sqrt() / (2.0 * PI) * 2.0 / n as f64
            })
            .sum();
        assert!((semicircle_cdf(1.0) - semicircle_cdf(-1.0) - mid).abs() < 1e-9);
    }

    #[test]
    fn histogram_mass() {
        let t = satotate_sample(5, 200_000).unwrap();
        let h = satotate_histogram(&t, 200_000, 20).unwrap();
        assert!((h.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((h.expected.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(h.discrepancy < 0.01, "{}", h.discrepancy);
    }

    #[test]
    fn serre_sums() {
        let base = satotate_sample(1, 10_000).unwrap();
        let none = vanishing_model(&base, &DensitySchedule::None);
        let d = serre_cm_density(&none, 10_000).unwrap();
        assert_eq!(d.vanishing_sum.to_bits(), 0.0f64.to_bits());
        let cm = cm_prime_table(10_000).unwrap();
        let d = serre_cm_density(&cm, 10_000).unwrap();
        let want: f64 = crate::arith::primes_up_to(10_000)
            .into_iter()
            .filter(|p| *p == 2 || p % 4 == 3)
            .map(|p| 1.0 / p as f64)
            .sum();
        assert!((d.vanishing_sum - want).abs() < 1e-12);
    }
}
