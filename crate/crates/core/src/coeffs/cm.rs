use num_bigint::BigInt;

use super::{normalize_exact, FormKind, PrimeEigenvalueTable};
use crate::arith::{is_prime, isqrt, primes_up_to};
use crate::error::{Error, Result};
use crate::ntt::pow_mod;

/// a_p = p + 1 - #E(F_p) for E: y^2 = x^3 - x, by counting points.
pub fn cm_ap(p: u64) -> Result<i64> {
    if p == 2 {
        return Err(Error::BadPrime(2));
    }
    if !is_prime(p) {
        return Err(Error::param(format!("{p} is not an odd prime")));
    }
    let mut square = vec![false; p as usize];
    for x in 0..p {
        square[(x * x % p) as usize] = true;
    }
    // affine points: 1 for y = 0, else 2 when x^3 - x is a nonzero square
    let mut points = 1i64;
    for x in 0..p {
        let v = ((x * x % p) * x + p - x) % p;
        points += if v == 0 {
            1
        } else if square[v as usize] {
            2
        } else {
            0
        };
    }
    Ok(p as i64 + 1 - points)
}

/// Same value from p = a^2 + b^2: a_p = 2a with a odd and a + b ≡ 1 (mod 4).
pub fn cm_ap_fast(p: u64) -> Result<i64> {
    if p == 2 {
        return Err(Error::BadPrime(2));
    }
    if p % 4 == 3 {
        return Ok(0);
    }
    let (a, b) = two_squares(p);
    let (odd, even) = if a % 2 == 1 { (a, b) } else { (b, a) };
    let odd = odd as i64;
    let a = if (odd + even as i64) % 4 == 1 { odd } else { -odd };
    Ok(2 * a)
}

/// Cornacchia for x^2 + y^2 = p, p ≡ 1 (mod 4).
fn two_squares(p: u64) -> (u64, u64) {
    let mut c = 2;
    while pow_mod(c, (p - 1) / 2, p) != p - 1 {
        c += 1;
    }
    let mut r0 = p;
    let mut r1 = pow_mod(c, (p - 1) / 4, p);
    let root = isqrt(p);
    while r1 > root {
        let r = r0 % r1;
        r0 = r1;
        r1 = r;
    }
    let b = isqrt(p - r1 * r1);
    debug_assert_eq!(r1 * r1 + b * b, p);
    (r1, b)
}

/// λ(p) = a_p / √p for the conductor-32 curve. The bad prime 2 has λ(2) = 0.
pub fn cm_prime_table(limit: u64) -> Result<PrimeEigenvalueTable> {
    if limit < 2 {
        return Err(Error::param("prime bound must be at least 2"));
    }
    let primes = primes_up_to(limit);
    let mut lambdas = Vec::with_capacity(primes.len());
    let mut exact = Vec::with_capacity(primes.len());
    for &p in &primes {
        let a = if p == 2 { 0 } else { cm_ap_fast(p)? };
        let a = BigInt::from(a);
        lambdas.push(normalize_exact(&a, p, 2));
        exact.push(a);
    }
    PrimeEigenvalueTable::from_parts(
        FormKind::CmCurve,
        2,
        limit,
        primes,
        lambdas,
        Some(exact),
        "y^2 = x^3 - x, a_p from p = a^2 + b^2",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes_by_counting() {
        assert_eq!(cm_ap(3).unwrap(), 0);
        assert_eq!(cm_ap(5).unwrap(), -2);
        assert_eq!(cm_ap(13).unwrap(), 6);
        assert!(matches!(cm_ap(2), Err(Error::BadPrime(2))));
        assert!(cm_ap(9).is_err());
    }

    #[test]
    fn closed_form_agrees_with_counting() {
        for p in primes_up_to(10_000).into_iter().skip(1) {
            let a = cm_ap(p).unwrap();
            assert_eq!(cm_ap_fast(p).unwrap(), a, "p = {p}");
            assert_eq!(a == 0, p % 4 == 3, "p = {p}");
            assert!(a * a <= 4 * p as i64);
        }
    }

    #[test]
    fn table_respects_bound() {
        let t = cm_prime_table(100_000).unwrap();
        t.validate().unwrap();
        assert_eq!(t.lambda(2).unwrap(), 0.0);
        assert!((t.lambda(5).unwrap() + 2.0 / 5f64.sqrt()).abs() < 1e-15);
    }
}
