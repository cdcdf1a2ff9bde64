//! Small integer helpers shared by the sieves and the test oracles.

/// All primes `p <= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if limit < 2 {
        return out;
    }
    out.push(2);
    let root = isqrt(limit);
    // base primes for the segmented pass
    let mut small = vec![true; root as usize + 1];
    let mut base = Vec::new();
    for i in 2..=root as usize {
        if small[i] {
            if i > 2 {
                base.push(i as u64);
            }
            let mut j = i * i;
            while j <= root as usize {
                small[j] = false;
                j += i;
            }
        }
    }
    out.reserve((limit as f64 / (limit as f64).ln().max(1.0) * 1.2) as usize);

    // segments hold odd numbers lo, lo+2, ...
    const SEG: u64 = 1 << 18;
    let mut seg = vec![true; SEG as usize];
    let mut lo = 3u64;
    while lo <= limit {
        let hi = (lo + 2 * SEG).min(limit + 1);
        let len = (hi - lo).div_ceil(2) as usize;
        seg[..len].fill(true);
        for &p in &base {
            if p * p >= hi {
                break;
            }
            let mut start = (p * p).max(lo.div_ceil(p) * p);
            if start % 2 == 0 {
                start += p;
            }
            let mut k = ((start - lo) / 2) as usize;
            while k < len {
                seg[k] = false;
                k += p as usize;
            }
        }
        for (k, &is_p) in seg[..len].iter().enumerate() {
            if is_p {
                out.push(lo + 2 * k as u64);
            }
        }
        lo = hi + hi.is_multiple_of(2) as u64;
    }
    out
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = ((n as f64).sqrt() as u64).min(u32::MAX as u64);
    while r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u128;
    // Newton from the float guess, then fix up
    loop {
        let y = (x + n / x.max(1)) / 2;
        if y >= x {
            break;
        }
        x = y;
    }
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

/// Trial-division factorization, ascending primes with exponents.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).first() == Some(&(n, 1))
}

pub fn mobius(n: u64) -> i8 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn smallest_prime_factor(n: u64) -> u64 {
    factorize(n).first().map_or(1, |&(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segmented_primes_agree_with_trial_division() {
        for limit in [0u64, 1, 2, 3, 10, 97, 1000, 600_000] {
            let fast = primes_up_to(limit);
            let slow: Vec<u64> = (2..=limit.min(20_000)).filter(|&n| is_prime(n)).collect();
            assert_eq!(&fast[..slow.len()], &slow[..]);
            assert!(fast.iter().all(|&p| p <= limit));
        }
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
        assert_eq!(primes_up_to(10_000_000).len(), 664_579);
    }

    #[test]
    fn integer_roots() {
        for n in (0..10_000u64).chain([u64::MAX, (1 << 62) + 12345]) {
            let r = isqrt(n);
            assert!(r as u128 * r as u128 <= n as u128 && (r as u128 + 1).pow(2) > n as u128);
        }
        for n in [0u128, 1, 99, u128::MAX, 1 << 126, (1u128 << 100) + 7] {
            let r = isqrt_u128(n);
            assert!(r * r <= n);
            assert!((r + 1).checked_mul(r + 1).is_none_or(|s| s > n));
        }
    }

    #[test]
    fn mobius_small_values() {
        let want = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1];
        for (i, &m) in want.iter().enumerate() {
            assert_eq!(mobius(i as u64 + 1), m);
        }
    }
}
