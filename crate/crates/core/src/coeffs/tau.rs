use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::ntt::{Crt, Modulus, NTT_PRIMES};

/// Series lengths at or below this use 128-bit arithmetic in `Auto` mode.
pub const DEFAULT_FIXED_LIMIT: usize = 16_384;

/// Longest series the multi-modular backend reconstructs exactly.
pub const TAU_SERIES_LIMIT: usize = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauPrecision {
    /// Checked 128-bit schoolbook products.
    Fixed128,
    /// Exact residues modulo several NTT primes, lifted by CRT.
    Arbitrary,
    /// `Fixed128` up to the given length, `Arbitrary` above.
    Auto(usize),
}

impl Default for TauPrecision {
    fn default() -> Self {
        TauPrecision::Auto(DEFAULT_FIXED_LIMIT)
    }
}

/// τ(1), ..., τ(n).
pub fn tau_series(n: usize) -> Result<Vec<BigInt>> {
    tau_series_with(n, TauPrecision::default())
}

pub fn tau_series_with(n: usize, precision: TauPrecision) -> Result<Vec<BigInt>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let fixed = match precision {
        TauPrecision::Fixed128 => true,
        TauPrecision::Arbitrary => false,
        TauPrecision::Auto(limit) => n <= limit,
    };
    if fixed {
        let base: Vec<i128> = pentagonal(n).into_iter().map(i128::from).collect();
        let out = pow_trunc(&CheckedI128, base, 24, n)?;
        Ok(out.into_iter().map(BigInt::from).collect())
    } else {
        tau_multimodular(n)
    }
}

/// Coefficients of ∏(1 - q^k) below q^n (pentagonal number theorem).
pub(crate) fn pentagonal(n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n];
    out[0] = 1;
    let mut k = 1usize;
    loop {
        let sign = if k % 2 == 1 { -1 } else { 1 };
        let e1 = k * (3 * k - 1) / 2;
        let e2 = k * (3 * k + 1) / 2;
        if e1 >= n {
            break;
        }
        out[e1] += sign;
        if e2 < n {
            out[e2] += sign;
        }
        k += 1;
    }
    out
}

trait SeriesRing {
    type C: Clone;
    fn one(&self) -> Self::C;
    fn zero(&self) -> Self::C;
    fn mul(&self, a: &[Self::C], b: &[Self::C], n: usize) -> Result<Vec<Self::C>>;
    fn square(&self, a: Vec<Self::C>, n: usize) -> Result<Vec<Self::C>> {
        self.mul(&a, &a, n)
    }
}

/// `base^e mod q^n` by binary exponentiation.
fn pow_trunc<R: SeriesRing>(ring: &R, base: Vec<R::C>, mut e: u32, n: usize) -> Result<Vec<R::C>> {
    let mut acc: Option<Vec<R::C>> = None;
    let mut sq = base;
    loop {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some(a) => ring.mul(&a, &sq, n)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        sq = ring.square(sq, n)?;
    }
    Ok(acc.unwrap_or_else(|| {
        let mut one = vec![ring.zero(); n];
        one[0] = ring.one();
        one
    }))
}

struct CheckedI128;

impl SeriesRing for CheckedI128 {
    type C = i128;

    fn one(&self) -> i128 {
        1
    }

    fn zero(&self) -> i128 {
        0
    }

    fn mul(&self, a: &[i128], b: &[i128], n: usize) -> Result<Vec<i128>> {
        let mut out = vec![0i128; n];
        for (i, &x) in a.iter().enumerate().take(n) {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(n - i) {
                if y == 0 {
                    continue;
                }
                let idx = i + j;
                out[idx] = x
                    .checked_mul(y)
                    .and_then(|t| out[idx].checked_add(t))
                    .ok_or(Error::Overflow { index: idx })?;
            }
        }
        Ok(out)
    }
}

struct ModRing<'a>(&'a Modulus);

impl SeriesRing for ModRing<'_> {
    type C = u32;

    fn one(&self) -> u32 {
        self.0.one()
    }

    fn zero(&self) -> u32 {
        0
    }

    fn mul(&self, a: &[u32], b: &[u32], n: usize) -> Result<Vec<u32>> {
        Ok(self.0.mul_trunc(a, b, n))
    }

    fn square(&self, a: Vec<u32>, n: usize) -> Result<Vec<u32>> {
        Ok(self.0.square_trunc(a, n))
    }
}

fn tau_multimodular(n: usize) -> Result<Vec<BigInt>> {
    if n > TAU_SERIES_LIMIT {
        return Err(Error::capacity("tau series length", TAU_SERIES_LIMIT as u64));
    }
    // |τ(k)| <= d(k) k^(11/2) <= 2 k^6
    let bits = 1 + (6.0 * (n as f64).log2()).ceil() as u32;
    let count = Crt::moduli_for_bits(bits).expect("enough moduli below the series limit");
    let pent = pentagonal(n);
    let mut residues: Vec<Vec<u32>> = Vec::with_capacity(count);
    let mut moduli = Vec::with_capacity(count);
    for &(m, g) in &NTT_PRIMES[..count] {
        let md = Modulus::new(m, g);
        let base: Vec<u32> = pent.iter().map(|&c| md.from_i64(c)).collect();
        let series = pow_trunc(&ModRing(&md), base, 24, n)?;
        residues.push(series.into_iter().map(|x| md.from_mont(x)).collect());
        moduli.push(m);
    }
    let crt = Crt::new(&moduli);
    let mut digits = vec![0u32; count];
    Ok((0..n)
        .map(|i| {
            for (d, r) in digits.iter_mut().zip(&residues) {
                *d = r[i];
            }
            crt.reconstruct(&digits)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∏_{k<n} (1 - q^k)^24 expanded factor by factor.
    fn naive_tau(n: usize) -> Vec<i128> {
        let mut s = vec![0i128; n];
        s[0] = 1;
        for k in 1..n {
            for _ in 0..24 {
                for i in (k..n).rev() {
                    s[i] -= s[i - k];
                }
            }
        }
        s
    }

    #[test]
    fn pentagonal_matches_direct_product() {
        let n = 200;
        let mut s = vec![0i64; n];
        s[0] = 1;
        for k in 1..n {
            for i in (k..n).rev() {
                s[i] -= s[i - k];
            }
        }
        assert_eq!(pentagonal(n), s);
    }

    #[test]
    fn leading_values() {
        let t = tau_series(10).unwrap();
        let want = [1i64, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920];
        assert_eq!(t, want.map(BigInt::from).to_vec());
        assert!(tau_series(0).unwrap().is_empty());
    }

    #[test]
    fn both_backends_agree_with_naive_expansion() {
        let n = 600;
        let naive = naive_tau(n);
        let fixed = tau_series_with(n, TauPrecision::Fixed128).unwrap();
        let modular = tau_series_with(n, TauPrecision::Arbitrary).unwrap();
        for i in 0..n {
            assert_eq!(fixed[i], BigInt::from(naive[i]));
            assert_eq!(modular[i], fixed[i]);
        }
    }

    #[test]
    fn fixed_width_overflow_is_reported() {
        // P^16 and P^8 products overflow i128 partial sums only at large n; force it with a tiny ring
        let big = vec![i128::MAX / 2, 3];
        let err = CheckedI128.mul(&big, &big, 2).unwrap_err();
        assert!(matches!(err, Error::Overflow { index: 0 }));
        assert!(err.to_string().contains("arbitrary-precision"));
    }
}
