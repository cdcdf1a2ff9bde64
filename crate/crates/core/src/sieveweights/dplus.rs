use super::params::SieveParams;
use crate::arith::{factorize, primes_up_to};
use crate::error::{Error, Result};

/// Largest sieve level for which 𝒟⁺ is listed explicitly.
pub const DPLUS_Y_LIMIT: u64 = 10_000_000;

/// Whether the descending prime list satisfies p_m <= y_m at every odd index m.
pub(crate) fn admissible_desc(primes_desc: &[u64], params: &SieveParams) -> bool {
    primes_desc
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 2 == 0)
        .all(|(i, &p)| (p as f64) <= params.y_m(i as u32 + 1))
}

/// d = 1, or d = p_1 ... p_r squarefree with p_1 > ... > p_r and p_m <= y_m for odd m.
pub fn in_dplus(d: u64, params: &SieveParams) -> bool {
    if d == 0 {
        return false;
    }
    let f = factorize(d);
    if f.iter().any(|&(_, e)| e > 1) {
        return false;
    }
    let desc: Vec<u64> = f.iter().rev().map(|&(p, _)| p).collect();
    admissible_desc(&desc, params)
}

/// All of 𝒟⁺ with Möbius signs, ascending.
pub fn enumerate_dplus(params: &SieveParams) -> Result<Vec<(u64, i8)>> {
    if params.y > DPLUS_Y_LIMIT {
        return Err(Error::capacity("sieve level for explicit support", DPLUS_Y_LIMIT));
    }
    let primes = primes_up_to(params.y1().floor() as u64);
    let mut out = vec![(1u64, 1i8)];
    // stack of (product, sign, index bound into primes, next 1-based position)
    let mut stack: Vec<(u64, i8, usize, u32)> = vec![(1, 1, primes.len(), 1)];
    while let Some((d, sign, bound, m)) = stack.pop() {
        let cap = if m % 2 == 1 { params.y_m(m) } else { f64::INFINITY };
        if cap < 2.0 {
            continue;
        }
        for (i, &p) in primes[..bound].iter().enumerate() {
            if p as f64 > cap {
                break;
            }
            let e = d * p;
            out.push((e, -sign));
            stack.push((e, -sign, i, m + 1));
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::mobius;

    #[test]
    fn membership_examples() {
        let p = SieveParams::from_y(1000, 0.5).unwrap();
        let y1 = p.y1();
        assert!(in_dplus(1, &p));
        for q in [2u64, 3, 11, 13, 17, 997] {
            assert_eq!(in_dplus(q, &p), (q as f64) <= y1);
        }
        // index 2 is free: 13 * 11 qualifies, 17 * 2 does not
        assert!(in_dplus(13 * 11, &p));
        assert!(!in_dplus(17 * 2, &p));
        assert!(!in_dplus(4, &p));
        assert!(!in_dplus(2 * 3 * 5, &p));
    }

    #[test]
    fn enumeration_matches_filter() {
        for gamma in [0.5, 0.3, 0.1, super::super::params::default_gamma()] {
            let p = SieveParams::from_y(1000, gamma).unwrap();
            let listed = enumerate_dplus(&p).unwrap();
            let brute: Vec<(u64, i8)> = (1..=p.y)
                .filter(|&d| in_dplus(d, &p))
                .map(|d| (d, mobius(d)))
                .collect();
            assert_eq!(listed, brute, "gamma = {gamma}");
            assert!(listed.iter().all(|&(d, _)| d <= p.y));
            assert_eq!(listed[0], (1, 1));
        }
    }

    #[test]
    fn support_grows_with_level() {
        let mut last = 0;
        for y in [10u64, 100, 1000, 10_000, 100_000] {
            let n = enumerate_dplus(&SieveParams::from_y(y, 0.3).unwrap()).unwrap().len();
            assert!(n >= last);
            last = n;
        }
        assert!(enumerate_dplus(&SieveParams::from_y(DPLUS_Y_LIMIT + 1, 0.5).unwrap()).is_err());
    }
}
