use super::dplus::enumerate_dplus;
use super::params::SieveParams;
use crate::error::{Error, Result};

/// ρ⁺(n) = Σ_{d | n, d ∈ 𝒟⁺} μ(d) on `[lo, hi)`, by scattering over multiples.
pub fn rho_plus_window(params: &SieveParams, lo: u64, hi: u64) -> Result<Vec<i32>> {
    if lo == 0 || hi <= lo {
        return Err(Error::param(format!("bad window [{lo}, {hi})")));
    }
    let support = enumerate_dplus(params)?;
    Ok(scatter(&support, lo, hi))
}

pub(crate) fn scatter(support: &[(u64, i8)], lo: u64, hi: u64) -> Vec<i32> {
    let mut rho = vec![0i32; (hi - lo) as usize];
    for &(d, mu) in support {
        let mut m = lo.div_ceil(d) * d;
        while m < hi {
            rho[(m - lo) as usize] += mu as i32;
            m += d;
        }
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factorize, mobius};
    use crate::sieveweights::in_dplus;

    fn divisor_sum(n: u64, p: &SieveParams, include_one: bool) -> i32 {
        let f = factorize(n);
        let primes: Vec<u64> = f.iter().map(|&(q, _)| q).collect();
        let mut s = 0;
        for mask in 0u32..(1 << primes.len()) {
            let d: u64 = (0..primes.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| primes[i])
                .product();
            if (d > 1 || include_one) && in_dplus(d, p) {
                s += mobius(d) as i32;
            }
        }
        s
    }

    #[test]
    fn matches_divisor_sum_and_bounds() {
        for gamma in [0.5, 0.3] {
            let p = SieveParams::from_y(1000, gamma).unwrap();
            let rho = rho_plus_window(&p, 1, 20_001).unwrap();
            for n in 1..=20_000u64 {
                let r = rho[n as usize - 1];
                assert_eq!(r, divisor_sum(n, &p, true), "n = {n}");
                let rough = factorize(n).first().is_none_or(|&(q, _)| q > p.y);
                assert!(r >= rough as i32 && r >= 0, "n = {n}");
            }
        }
    }

    #[test]
    fn excluding_one_breaks_the_lower_bound() {
        let p = SieveParams::from_y(1000, 0.5).unwrap();
        assert_eq!(divisor_sum(1, &p, false), 0);
        assert_eq!(rho_plus_window(&p, 1, 2).unwrap(), vec![1]);
        assert_eq!(rho_plus_window(&p, 1009, 1010).unwrap(), vec![1]);
    }
}
