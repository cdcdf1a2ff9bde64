use super::spec::MultiplicativeSpec;
use crate::arith::primes_up_to;
use crate::coeffs::PrimeEigenvalueTable;
use crate::error::{Error, Result};

/// `x exp(-(1/4) Σ_{p<=x} (1 - g(p))/p)`, the mean-value bound without its constant.
pub fn halasz_bound(spec: &MultiplicativeSpec, x: u64) -> Result<f64> {
    let mut sum = 0.0;
    for p in primes_up_to(x) {
        let g = spec.value(p, 1)?;
        if !(-1.0..=1.0).contains(&g) {
            return Err(Error::Domain { p, value: g });
        }
        sum += (1.0 - g) / p as f64;
    }
    Ok(x as f64 * (-0.25 * sum).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerProduct {
    /// ∏_{p <= P} (1 - 1/p)(1 + g(p)/p + g(p²)/p² + ...).
    pub value: f64,
    /// Σ_{P < p <= limit} |g(p) - 1|/p when g is known on a larger prime range.
    pub tail_log_estimate: Option<f64>,
}

const TERM_FLOOR: f64 = 1e-18;
const POWER_CEILING: f64 = 1e15;

/// Truncated M(g). Local factors stop once p^ν > 10^15 or a term drops below 10^-18.
pub fn euler_product_m(spec: &MultiplicativeSpec, p_trunc: u64) -> Result<EulerProduct> {
    if let Some(limit) = spec.prime_limit() {
        if p_trunc > limit {
            return Err(Error::capacity("euler product truncation", limit));
        }
    }
    let mut log_value = 0.0f64;
    for p in primes_up_to(p_trunc) {
        let pf = p as f64;
        let mut local = 1.0f64;
        let mut pk = 1.0f64;
        let mut nu = 1u32;
        loop {
            pk *= pf;
            if pk > POWER_CEILING {
                break;
            }
            let term = spec.value(p, nu)? / pk;
            local += term;
            if term.abs() < TERM_FLOOR {
                break;
            }
            nu += 1;
        }
        log_value += (-1.0 / pf).ln_1p() + local.ln();
    }
    let tail_log_estimate = match spec.prime_limit() {
        Some(limit) if limit > p_trunc => {
            let mut s = 0.0;
            for p in primes_up_to(limit).into_iter().filter(|&p| p > p_trunc) {
                s += (spec.value(p, 1)? - 1.0).abs() / p as f64;
            }
            Some(s)
        }
        _ => None,
    };
    Ok(EulerProduct {
        value: log_value.exp(),
        tail_log_estimate,
    })
}

/// Density factors from the primes where λ vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonzeroDensity {
    /// ∏_{p<=X, λ(p)=0} (1 - 1/p)
    pub lower_product: f64,
    /// ∏_{p<=X, λ(p)=0} (1 + 1/p)^-1
    pub upper_product: f64,
    /// k(X) = ∏_{p<=X, λ(p)=0} (1 + 1/p)
    pub k: f64,
}

pub fn density_nonzero(table: &PrimeEigenvalueTable, x: u64) -> Result<NonzeroDensity> {
    if x > table.limit {
        return Err(Error::OutOfRange {
            value: x,
            limit: table.limit,
        });
    }
    let (mut lower, mut k) = (1.0, 1.0);
    for p in table.vanishing_primes(x) {
        let pf = p as f64;
        lower *= 1.0 - 1.0 / pf;
        k *= 1.0 + 1.0 / pf;
    }
    Ok(NonzeroDensity {
        lower_product: lower,
        upper_product: 1.0 / k,
        k,
    })
}
