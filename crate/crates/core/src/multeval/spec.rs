use std::fmt;
use std::sync::Arc;

use crate::coeffs::{PrimeEigenvalueTable, SYNTHETIC_ZERO_THRESHOLD};
use crate::error::{Error, Result};

type PrimePowerFn = dyn Fn(u64, u32) -> Result<f64> + Send + Sync;

/// A multiplicative function given by its values on prime powers.
#[derive(Clone)]
pub struct MultiplicativeSpec {
    description: String,
    value: Arc<PrimePowerFn>,
    zero_threshold: f64,
    prime_limit: Option<u64>,
}

impl fmt::Debug for MultiplicativeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplicativeSpec")
            .field("description", &self.description)
            .field("zero_threshold", &self.zero_threshold)
            .field("prime_limit", &self.prime_limit)
            .finish()
    }
}

impl MultiplicativeSpec {
    pub fn from_fn<F>(description: impl Into<String>, zero_threshold: f64, f: F) -> Self
    where
        F: Fn(u64, u32) -> Result<f64> + Send + Sync + 'static,
    {
        MultiplicativeSpec {
            description: description.into(),
            value: Arc::new(f),
            zero_threshold,
            prime_limit: None,
        }
    }

    /// Completely multiplicative function with the given prime values.
    pub fn completely_multiplicative<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(description, SYNTHETIC_ZERO_THRESHOLD, move |p, nu| {
            Ok(f(p).powi(nu as i32))
        })
    }

    pub fn constant_one() -> Self {
        Self::from_fn("1", 0.0, |_, _| Ok(1.0))
    }

    /// μ²: 1 on primes, 0 on higher powers.
    pub fn mobius_squared() -> Self {
        Self::from_fn("mu^2", 0.0, |_, nu| Ok(if nu == 1 { 1.0 } else { 0.0 }))
    }

    /// λ(p^ν) from λ(p) by λ(p^(ν+1)) = λ(p) λ(p^ν) - λ(p^(ν-1)).
    /// At bad primes, and for the unit model, the local factor is completely multiplicative.
    pub fn hecke_extend(table: Arc<PrimeEigenvalueTable>) -> Self {
        let limit = table.limit;
        let bad = table.kind.bad_primes();
        let complete = table.kind.completely_multiplicative();
        let zero_threshold = table.zero_threshold();
        let description = format!("hecke extension of {} table to {}", table.kind, table.limit);
        let f = move |p: u64, nu: u32| -> Result<f64> {
            let l = table.lambda(p)?;
            if complete || bad.contains(&p) {
                return Ok(l.powi(nu as i32));
            }
            Ok(hecke_power(l, nu))
        };
        let mut spec = Self::from_fn(description, zero_threshold, f);
        spec.prime_limit = Some(limit);
        spec
    }

    /// sgn ∘ self under the same zero threshold.
    pub fn sign(&self) -> Self {
        let inner = self.clone();
        let thr = self.zero_threshold;
        let mut s = Self::from_fn(format!("sgn({})", self.description), 0.0, move |p, nu| {
            Ok(sign_of(inner.value(p, nu)?, thr) as f64)
        });
        s.prime_limit = self.prime_limit;
        s
    }

    /// 1 where self is nonzero.
    pub fn nonzero_indicator(&self) -> Self {
        let inner = self.clone();
        let thr = self.zero_threshold;
        let mut s = Self::from_fn(format!("1[{} != 0]", self.description), 0.0, move |p, nu| {
            Ok((sign_of(inner.value(p, nu)?, thr) != 0) as u8 as f64)
        });
        s.prime_limit = self.prime_limit;
        s
    }

    pub fn abs(&self) -> Self {
        let inner = self.clone();
        let mut s = Self::from_fn(format!("|{}|", self.description), self.zero_threshold, move |p, nu| {
            Ok(inner.value(p, nu)?.abs())
        });
        s.prime_limit = self.prime_limit;
        s
    }

    pub fn value(&self, p: u64, nu: u32) -> Result<f64> {
        if nu == 0 {
            return Ok(1.0);
        }
        (self.value)(p, nu)
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn zero_threshold(&self) -> f64 {
        self.zero_threshold
    }

    /// Largest prime g is known at, when bounded.
    pub fn prime_limit(&self) -> Option<u64> {
        self.prime_limit
    }

    pub fn with_prime_limit(mut self, limit: u64) -> Self {
        self.prime_limit = Some(limit);
        self
    }

    /// Value at `n` from trial-division factorization.
    pub fn evaluate(&self, n: u64) -> Result<f64> {
        crate::arith::factorize(n)
            .into_iter()
            .try_fold(1.0, |acc, (p, e)| Ok(acc * self.value(p, e)?))
    }

    pub(crate) fn check_range(&self, p: u64) -> Result<()> {
        match self.prime_limit {
            Some(limit) if p > limit => Err(Error::OutOfRange { value: p, limit }),
            _ => Ok(()),
        }
    }
}

/// U_ν(λ/2) via the three-term recurrence.
pub fn hecke_power(l: f64, nu: u32) -> f64 {
    let (mut prev, mut cur) = (1.0, l);
    if nu == 0 {
        return 1.0;
    }
    for _ in 1..nu {
        let next = l * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn sign_of(v: f64, zero_threshold: f64) -> i8 {
    if v == 0.0 || v.abs() < zero_threshold {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{cm_prime_table, delta_prime_table};

    #[test]
    fn recurrence_closure() {
        let t = Arc::new(delta_prime_table(2000).unwrap());
        let g = MultiplicativeSpec::hecke_extend(t.clone());
        for &p in t.primes() {
            let l = t.lambda(p).unwrap();
            assert!((g.value(p, 2).unwrap() - (l * l - 1.0)).abs() <= 1e-12);
            for nu in 1..=8 {
                let next = g.value(p, nu + 1).unwrap();
                let rec = l * g.value(p, nu).unwrap() - g.value(p, nu - 1).unwrap();
                assert!((next - rec).abs() <= 1e-12);
            }
        }
        assert!((g.value(2, 2).unwrap() + 0.71875).abs() < 1e-15);
        assert!(matches!(g.value(2003, 1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn zero_at_prime_gives_period_four() {
        let want = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0];
        for (nu, w) in want.iter().enumerate() {
            assert_eq!(hecke_power(0.0, nu as u32), *w);
        }
        let cm = MultiplicativeSpec::hecke_extend(Arc::new(cm_prime_table(100).unwrap()));
        assert_eq!(cm.value(3, 2).unwrap(), -1.0);
        // conductor 32: λ(2^ν) = λ(2)^ν = 0
        assert_eq!(cm.value(2, 2).unwrap(), 0.0);
    }

    #[test]
    fn derived_functions() {
        let t = Arc::new(delta_prime_table(100).unwrap());
        let g = MultiplicativeSpec::hecke_extend(t);
        assert_eq!(g.sign().value(2, 1).unwrap(), -1.0);
        assert_eq!(g.sign().value(3, 1).unwrap(), 1.0);
        assert_eq!(g.nonzero_indicator().value(2, 3).unwrap(), 1.0);
        assert!(g.abs().value(2, 1).unwrap() > 0.0);
        assert_eq!(MultiplicativeSpec::mobius_squared().evaluate(12).unwrap(), 0.0);
        assert_eq!(MultiplicativeSpec::mobius_squared().evaluate(30).unwrap(), 1.0);
        assert_eq!(MultiplicativeSpec::constant_one().evaluate(1).unwrap(), 1.0);
        assert_eq!(sign_of(1e-15, 1e-14), 0);
        assert_eq!(sign_of(-1e-15, 0.0), -1);
    }
}
