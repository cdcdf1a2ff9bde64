use super::spec::{sign_of, MultiplicativeSpec};
use super::spf::spf_table;
use crate::arith::primes_up_to;
use crate::error::{Error, Result};

/// λ(n) and its sign for n in `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientWindow {
    pub lo: u64,
    pub hi: u64,
    pub values: Vec<f64>,
    pub signs: Vec<i8>,
    pub zero_threshold: f64,
}

impl CoefficientWindow {
    pub fn from_values(lo: u64, values: Vec<f64>, zero_threshold: f64) -> Self {
        let signs = values.iter().map(|&v| sign_of(v, zero_threshold)).collect();
        CoefficientWindow {
            lo,
            hi: lo + values.len() as u64,
            values,
            signs,
            zero_threshold,
        }
    }

    /// Window with only a sign sequence; values are the signs themselves.
    pub fn from_signs(lo: u64, signs: Vec<i8>) -> Self {
        let values = signs.iter().map(|&s| s as f64).collect();
        CoefficientWindow {
            lo,
            hi: lo + signs.len() as u64,
            values,
            signs,
            zero_threshold: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        (self.lo..self.hi).contains(&n)
    }

    pub fn value(&self, n: u64) -> f64 {
        self.values[(n - self.lo) as usize]
    }

    pub fn sign(&self, n: u64) -> i8 {
        self.signs[(n - self.lo) as usize]
    }
}

fn capacity(e: Error) -> Error {
    match e {
        Error::OutOfRange { value, limit } => Error::capacity(
            format!("window needs lambda({value}) beyond the prime table"),
            limit,
        ),
        other => other,
    }
}

/// Evaluate a multiplicative function on `[lo, hi)`.
///
/// Windows starting at 1 use the smallest-prime-factor table; others use a segmented sieve
/// that strikes prime powers up to √hi and reads g at the remaining prime cofactor.
pub fn evaluate_window(spec: &MultiplicativeSpec, lo: u64, hi: u64) -> Result<CoefficientWindow> {
    if lo == 0 || hi <= lo {
        return Err(Error::param(format!("bad window [{lo}, {hi})")));
    }
    let values = if lo == 1 {
        spf_values(spec, hi).map_err(capacity)?
    } else {
        segmented_values(spec, lo, hi).map_err(capacity)?
    };
    Ok(CoefficientWindow::from_values(lo, values, spec.zero_threshold()))
}

fn spf_values(spec: &MultiplicativeSpec, hi: u64) -> Result<Vec<f64>> {
    let top = hi - 1;
    if let Some(limit) = spec.prime_limit() {
        if top > limit {
            return Err(Error::OutOfRange { value: top, limit });
        }
    }
    let mut values = vec![0.0; hi as usize];
    values[0] = f64::NAN;
    values[1] = 1.0;
    if top < 2 {
        values.remove(0);
        return Ok(values);
    }
    let spf = spf_table(top)?;
    for n in 2..hi as usize {
        let p = spf[n] as usize;
        let mut m = n / p;
        let mut nu = 1;
        while m.is_multiple_of(p) {
            m /= p;
            nu += 1;
        }
        values[n] = spec.value(p as u64, nu)? * values[m];
    }
    values.remove(0);
    Ok(values)
}

fn segmented_values(spec: &MultiplicativeSpec, lo: u64, hi: u64) -> Result<Vec<f64>> {
    let len = (hi - lo) as usize;
    let mut values = vec![1.0f64; len];
    let mut rest: Vec<u64> = (lo..hi).collect();
    let root = crate::arith::isqrt(hi - 1);
    let mut powers: Vec<f64> = Vec::new();
    for p in primes_up_to(root) {
        spec.check_range(p)?;
        powers.clear();
        let first = lo.div_ceil(p) * p;
        let mut m = first;
        while m < hi {
            let i = (m - lo) as usize;
            let mut r = rest[i] / p;
            let mut nu = 1u32;
            while r.is_multiple_of(p) {
                r /= p;
                nu += 1;
            }
            rest[i] = r;
            while powers.len() < nu as usize {
                powers.push(spec.value(p, powers.len() as u32 + 1)?);
            }
            values[i] *= powers[nu as usize - 1];
            m += p;
        }
    }
    for (v, &r) in values.iter_mut().zip(&rest) {
        if r > 1 {
            *v *= spec.value(r, 1)?;
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::delta_prime_table;
    use std::sync::Arc;

    #[test]
    fn routes_agree_with_factorization() {
        let t = Arc::new(delta_prime_table(30_000).unwrap());
        let g = MultiplicativeSpec::hecke_extend(t);
        let full = evaluate_window(&g, 1, 30_000).unwrap();
        assert_eq!(full.value(1), 1.0);
        for n in 1..30_000u64 {
            let want = g.evaluate(n).unwrap();
            assert!((full.value(n) - want).abs() <= 1e-12 * want.abs().max(1.0), "n = {n}");
        }
        let part = evaluate_window(&g, 20_000, 30_000).unwrap();
        for n in 20_000..30_000u64 {
            let a = part.value(n);
            let b = full.value(n);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "n = {n}");
            assert_eq!(part.sign(n), full.sign(n));
        }
    }

    #[test]
    fn rejects_windows_past_the_table() {
        let t = Arc::new(delta_prime_table(1000).unwrap());
        let g = MultiplicativeSpec::hecke_extend(t);
        assert!(matches!(evaluate_window(&g, 1, 1002), Err(Error::Capacity { .. })));
        // 1009 is prime and past the table
        assert!(matches!(evaluate_window(&g, 1005, 1010), Err(Error::Capacity { .. })));
        assert!(evaluate_window(&g, 5, 5).is_err());
        let one = evaluate_window(&g, 1, 2).unwrap();
        assert_eq!(one.values, vec![1.0]);
    }
}
