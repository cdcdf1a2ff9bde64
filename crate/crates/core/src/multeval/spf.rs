use crate::error::{Error, Result};

/// Smallest prime factor of every n <= limit by a linear sieve; `spf[0] = 0`, `spf[1] = 1`.
pub fn spf_table(limit: u64) -> Result<Vec<u32>> {
    if limit < 2 {
        return Err(Error::param("spf table needs limit >= 2"));
    }
    if limit > u32::MAX as u64 {
        return Err(Error::capacity("spf table size", u32::MAX as u64));
    }
    let n = limit as usize;
    let mut spf: Vec<u32> = Vec::new();
    spf.try_reserve_exact(n + 1)
        .map_err(|_| Error::capacity("spf table allocation", limit))?;
    spf.resize(n + 1, 0);
    spf[1] = 1;
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let m = i * p as usize;
            if p > si || m > n {
                break;
            }
            spf[m] = p;
        }
    }
    Ok(spf)
}
