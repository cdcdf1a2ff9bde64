use super::{normalize_digits, FormKind, PrimeEigenvalueTable};
use crate::arith::primes_up_to;
use crate::error::{Error, Result};
use crate::ntt::{Crt, Modulus, MAX_LOG_LEN, NTT_PRIMES};

/// Largest prime bound the transform sizes allow.
pub const DELTA_SERIES_LIMIT: u64 = 1 << MAX_LOG_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeltaOptions {
    /// Keep τ(p) alongside the normalized value.
    pub keep_exact: bool,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions { keep_exact: true }
    }
}

/// λ_Δ(p) = τ(p) / p^(11/2) for every prime `p <= limit`.
pub fn delta_prime_table(limit: u64) -> Result<PrimeEigenvalueTable> {
    delta_prime_table_with(limit, DeltaOptions::default())
}

/// Δ = q E^8 with E = η^3 = Σ (-1)^k (2k+1) q^(k(k+1)/2). E^2 is formed from the sparse
/// sum, then squared twice modulo each NTT prime; only the residues at `p - 1` are kept.
pub fn delta_prime_table_with(limit: u64, opts: DeltaOptions) -> Result<PrimeEigenvalueTable> {
    if limit < 2 {
        return Err(Error::param("prime bound must be at least 2"));
    }
    if limit > DELTA_SERIES_LIMIT {
        return Err(Error::capacity("delta prime table bound", DELTA_SERIES_LIMIT));
    }
    let primes = primes_up_to(limit);
    let n = limit as usize;
    // |τ(p)| <= 2 p^(11/2)
    let bits = 2 + (5.5 * (limit as f64).log2()).ceil() as u32;
    let count = Crt::moduli_for_bits(bits).expect("five moduli cover the series limit");

    let mut residues: Vec<Vec<u32>> = Vec::with_capacity(count);
    let mut moduli = Vec::with_capacity(count);
    for &(m, g) in &NTT_PRIMES[..count] {
        let md = Modulus::new(m, g);
        let e2 = jacobi_square(&md, n);
        let e4 = md.square_trunc(e2, n);
        let e8 = md.square_trunc(e4, n);
        residues.push(primes.iter().map(|&p| md.from_mont(e8[p as usize - 1])).collect());
        moduli.push(m);
    }

    let crt = Crt::new(&moduli);
    let mut lambdas = Vec::with_capacity(primes.len());
    let mut exact = opts.keep_exact.then(|| Vec::with_capacity(primes.len()));
    let mut res = vec![0u32; count];
    let mut digits = vec![0u64; count];
    for (i, &p) in primes.iter().enumerate() {
        for (d, r) in res.iter_mut().zip(&residues) {
            *d = r[i];
        }
        let negative = crt.signed_digits(&res, &mut digits);
        let l = normalize_digits(&digits, crt.moduli(), negative, p, 12);
        if l.abs() > 2.0 {
            return Err(Error::param(format!("Deligne bound fails at p = {p}")));
        }
        lambdas.push(l);
        if let Some(e) = exact.as_mut() {
            e.push(crt.reconstruct(&res));
        }
    }
    drop(residues);
    PrimeEigenvalueTable::from_parts(
        FormKind::Delta,
        12,
        limit,
        primes,
        lambdas,
        exact,
        "q-expansion of Delta via eta^3, multi-modular NTT",
    )
}

/// E^2 mod q^n in Montgomery form, with room for the transform that follows.
fn jacobi_square(md: &Modulus, n: usize) -> Vec<u32> {
    let mut tri: Vec<usize> = Vec::new();
    let mut coef: Vec<u32> = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) / 2 < n {
        let c = (2 * k + 1) as i64 * if k.is_multiple_of(2) { 1 } else { -1 };
        tri.push(k * (k + 1) / 2);
        coef.push(md.from_i64(c));
        k += 1;
    }
    let twice: Vec<u32> = coef.iter().map(|&c| md.add(c, c)).collect();
    let mut out = Vec::with_capacity(n.next_power_of_two());
    out.resize(n, 0u32);

    // walk the output in cache-sized blocks; next[i] is the first partner j >= i not yet used
    const BLOCK: usize = 1 << 17;
    let mut next: Vec<usize> = (0..tri.len()).collect();
    let mut lo = 0;
    while lo < n {
        let hi = (lo + BLOCK).min(n);
        for i in 0..tri.len() {
            let ti = tri[i];
            if 2 * ti >= hi {
                break;
            }
            let mut j = next[i];
            while j < tri.len() && ti + tri[j] < hi {
                let t = ti + tri[j];
                let c = if j == i { coef[i] } else { twice[i] };
                out[t] = md.add(out[t], md.mul(c, coef[j]));
                j += 1;
            }
            next[i] = j;
        }
        lo = hi;
    }
    out
}
