//! Number-theoretic transform over 32-bit primes and multi-modular reconstruction.
//!
//! Arithmetic is done in Montgomery form with `R = 2^32`. The forward transform
//! leaves its output in bit-reversed order and the inverse transform consumes
//! bit-reversed input, so pointwise products need no permutation pass.
//! Small stages run block-by-block so that each block stays cache resident.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

/// Primes `c * 2^27 + 1` below `2^32`; every one supports transforms of length `2^27`.
pub const NTT_PRIMES: [(u32, u32); 5] = [
    (2_013_265_921, 31),
    (2_281_701_377, 3),
    (3_221_225_473, 5),
    (3_489_660_929, 3),
    (3_892_314_113, 3),
];

/// Largest transform length supported by every prime in [`NTT_PRIMES`].
pub const MAX_LOG_LEN: u32 = 27;

// elements per cache block for the small stages (256 KiB of u32)
const BLOCK_LOG: u32 = 16;
// row length of the vectorized two-pass layout
const ROW_LOG: u32 = 18;
// columns gathered per strip in the large-stage pass
const STRIP: usize = 128;

#[derive(Debug, Clone)]
pub struct Modulus {
    m: u32,
    m_inv: u32, // m * m_inv == 1 mod 2^32
    r2: u32,    // 2^64 mod m
    sum_e: [u32; 32],
    sum_ie: [u32; 32],
    rank2: u32,
    // es[i]: primitive 2^(i+2)-th root; block s uses prod of es[i] over the set bits of s
    es: [u32; 32],
    ies: [u32; 32],
    fast: Option<FastTables>,
}

#[derive(Debug, Clone)]
struct FastTables {
    tw: Vec<u32>,
    itw: Vec<u32>,
    // lane-ordered twiddles for the three narrowest stages
    lanes: [Vec<u32>; 3],
    ilanes: [Vec<u32>; 3],
}

impl Modulus {
    pub fn new(m: u32, generator: u32) -> Self {
        assert!(m % 2 == 1 && m > 2);
        let mut inv = 1u32;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(m.wrapping_mul(inv)));
        }
        let r2 = ((1u128 << 64) % m as u128) as u32;
        let rank2 = (m - 1).trailing_zeros();
        let mut md = Modulus {
            m,
            m_inv: inv,
            r2,
            sum_e: [0; 32],
            sum_ie: [0; 32],
            rank2,
            es: [0; 32],
            ies: [0; 32],
            fast: None,
        };
        let g = md.to_mont(generator);
        let mut e = md.pow(g, ((m - 1) >> rank2) as u64);
        let mut ie = md.inv(e);
        let mut es = [0u32; 32];
        let mut ies = [0u32; 32];
        for i in (2..=rank2 as usize).rev() {
            es[i - 2] = e;
            ies[i - 2] = ie;
            e = md.mul(e, e);
            ie = md.mul(ie, ie);
        }
        let mut now = md.one();
        let mut inow = md.one();
        for i in 0..=(rank2 as usize - 2) {
            md.sum_e[i] = md.mul(es[i], now);
            now = md.mul(now, ies[i]);
            md.sum_ie[i] = md.mul(ies[i], inow);
            inow = md.mul(inow, es[i]);
        }
        md.es = es;
        md.ies = ies;
        if simd::available() {
            md.fast = Some(md.build_fast_tables());
        }
        md
    }

    /// Twiddle of block `s`: the product of `es[i]` over the set bits of `s`.
    fn block_twiddle(&self, s: usize, inverse: bool) -> u32 {
        let roots = if inverse { &self.ies } else { &self.es };
        let mut acc = self.one();
        let mut bits = s;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            acc = self.mul(acc, roots[i]);
            bits &= bits - 1;
        }
        acc
    }

    fn build_fast_tables(&self) -> FastTables {
        let len = 1usize << (ROW_LOG - 1);
        let mut tw = vec![0u32; len];
        let mut itw = vec![0u32; len];
        tw[0] = self.one();
        itw[0] = self.one();
        for s in 1..len {
            let i = s.trailing_zeros() as usize;
            let prev = s & (s - 1);
            tw[s] = self.mul(tw[prev], self.es[i]);
            itw[s] = self.mul(itw[prev], self.ies[i]);
        }
        let lane_tables = |t: &[u32]| -> [Vec<u32>; 3] {
            // p = 4: two blocks per vector, [t0 x4 | t1 x4]
            let blocks4 = len >> 2;
            let mut l4 = Vec::with_capacity(blocks4 * 4);
            for j in (0..blocks4).step_by(2) {
                l4.extend_from_slice(&[t[j]; 4]);
                l4.extend_from_slice(&[t[j + 1]; 4]);
            }
            // p = 2: four blocks per vector pair, [t0 t0 t2 t2 | t1 t1 t3 t3]
            let blocks2 = len >> 1;
            let mut l2 = Vec::with_capacity(blocks2 * 2);
            for j in (0..blocks2).step_by(4) {
                for k in [0, 0, 2, 2, 1, 1, 3, 3] {
                    l2.push(t[j + k]);
                }
            }
            // p = 1: eight blocks per vector pair, [t0 t1 t4 t5 | t2 t3 t6 t7]
            let mut l1 = Vec::with_capacity(len);
            for j in (0..len).step_by(8) {
                for k in [0, 1, 4, 5, 2, 3, 6, 7] {
                    l1.push(t[j + k]);
                }
            }
            [l4, l2, l1]
        };
        FastTables {
            lanes: lane_tables(&tw),
            ilanes: lane_tables(&itw),
            tw,
            itw,
        }
    }

    pub fn value(&self) -> u32 {
        self.m
    }

    #[inline(always)]
    fn reduce(&self, t: u64) -> u32 {
        let u = (t as u32).wrapping_mul(self.m_inv);
        let hi = (t >> 32) as u32;
        let um = ((u as u64 * self.m as u64) >> 32) as u32;
        let (r, borrow) = hi.overflowing_sub(um);
        if borrow {
            r.wrapping_add(self.m)
        } else {
            r
        }
    }

    #[inline(always)]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 * b as u64)
    }

    #[inline(always)]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        if s >= self.m as u64 {
            (s - self.m as u64) as u32
        } else {
            s as u32
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        let (r, borrow) = a.overflowing_sub(b);
        if borrow {
            r.wrapping_add(self.m)
        } else {
            r
        }
    }

    pub fn to_mont(&self, a: u32) -> u32 {
        self.mul(a % self.m, self.r2)
    }

    pub fn from_mont(&self, a: u32) -> u32 {
        self.reduce(a as u64)
    }

    /// Montgomery form of a signed integer.
    pub fn from_i64(&self, a: i64) -> u32 {
        let r = a.rem_euclid(self.m as i64) as u32;
        self.to_mont(r)
    }

    pub fn one(&self) -> u32 {
        self.to_mont(1)
    }

    pub fn pow(&self, mut base: u32, mut e: u64) -> u32 {
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.pow(a, self.m as u64 - 2)
    }

    /// In-place forward transform; output in bit-reversed order.
    pub fn forward(&self, a: &mut [u32]) {
        if let Some(t) = &self.fast {
            if a.len() >= 1 << 5 {
                // SAFETY: tables are only built when AVX2 was detected at runtime.
                unsafe { simd::forward(self, t, a) };
                return;
            }
        }
        self.forward_scalar(a)
    }

    /// In-place inverse transform of bit-reversed input, including the `1/n` scaling.
    pub fn inverse(&self, a: &mut [u32]) {
        if let Some(t) = &self.fast {
            if a.len() >= 1 << 5 {
                // SAFETY: see `forward`.
                unsafe { simd::inverse(self, t, a) };
                return;
            }
        }
        self.inverse_scalar(a)
    }

    /// Portable radix-2 forward transform.
    pub fn forward_scalar(&self, a: &mut [u32]) {
        let n = a.len();
        assert!(n.is_power_of_two());
        let h = n.trailing_zeros();
        assert!(h <= self.rank2);
        let block_log = BLOCK_LOG.min(h);
        // stage `ph` works on blocks of size 2^(h - ph + 1)
        for ph in 1..=h {
            if h - ph < block_log {
                break;
            }
            self.forward_stage(a, h, ph, 0, 1usize << (ph - 1), self.one());
        }
        let first_small = (1..=h).find(|&ph| h - ph < block_log).unwrap_or(h + 1);
        if first_small > h {
            return;
        }
        let block = 1usize << block_log;
        let mut now = vec![self.one(); (h + 1) as usize];
        for sb in 0..n / block {
            for ph in first_small..=h {
                let per_block = block >> (h - ph + 1);
                let start = sb * per_block;
                now[ph as usize] =
                    self.forward_stage(a, h, ph, start, start + per_block, now[ph as usize]);
            }
        }
    }

    #[inline]
    fn forward_stage(
        &self,
        a: &mut [u32],
        h: u32,
        ph: u32,
        s_lo: usize,
        s_hi: usize,
        mut now: u32,
    ) -> u32 {
        let p = 1usize << (h - ph);
        for s in s_lo..s_hi {
            let offset = s << (h - ph + 1);
            let (left, right) = a[offset..offset + 2 * p].split_at_mut(p);
            for (l, r) in left.iter_mut().zip(right.iter_mut()) {
                let x = *l;
                let y = self.mul(*r, now);
                *l = self.add(x, y);
                *r = self.sub(x, y);
            }
            now = self.mul(now, self.sum_e[(!(s as u32)).trailing_zeros() as usize]);
        }
        now
    }

    /// Portable radix-2 inverse transform.
    pub fn inverse_scalar(&self, a: &mut [u32]) {
        let n = a.len();
        assert!(n.is_power_of_two());
        let h = n.trailing_zeros();
        assert!(h <= self.rank2);
        let block_log = BLOCK_LOG.min(h);
        let first_small = (1..=h).find(|&ph| h - ph < block_log).unwrap_or(h + 1);
        if first_small <= h {
            let block = 1usize << block_log;
            let mut inow = vec![self.one(); (h + 1) as usize];
            for sb in 0..n / block {
                for ph in (first_small..=h).rev() {
                    let per_block = block >> (h - ph + 1);
                    let start = sb * per_block;
                    inow[ph as usize] = self.inverse_stage(
                        a,
                        h,
                        ph,
                        start,
                        start + per_block,
                        inow[ph as usize],
                    );
                }
            }
        }
        for ph in (1..first_small.min(h + 1)).rev() {
            self.inverse_stage(a, h, ph, 0, 1usize << (ph - 1), self.one());
        }
        let scale = self.inv(self.to_mont(n as u32 % self.m));
        for x in a.iter_mut() {
            *x = self.mul(*x, scale);
        }
    }

    #[inline]
    fn inverse_stage(
        &self,
        a: &mut [u32],
        h: u32,
        ph: u32,
        s_lo: usize,
        s_hi: usize,
        mut inow: u32,
    ) -> u32 {
        let p = 1usize << (h - ph);
        for s in s_lo..s_hi {
            let offset = s << (h - ph + 1);
            let (left, right) = a[offset..offset + 2 * p].split_at_mut(p);
            for (l, r) in left.iter_mut().zip(right.iter_mut()) {
                let x = *l;
                let y = *r;
                *l = self.add(x, y);
                *r = self.mul(self.sub(x, y), inow);
            }
            inow = self.mul(inow, self.sum_ie[(!(s as u32)).trailing_zeros() as usize]);
        }
        inow
    }

    /// Truncated product `a * b mod x^n` of Montgomery-form series.
    pub fn mul_trunc(&self, a: &[u32], b: &[u32], n: usize) -> Vec<u32> {
        let a = &a[..a.len().min(n)];
        let b = &b[..b.len().min(n)];
        if a.is_empty() || b.is_empty() {
            return vec![0; n];
        }
        let out_len = (a.len() + b.len() - 1).min(n);
        if a.len().min(b.len()) <= 32 {
            let mut out = vec![0u32; n];
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate().take(out_len.saturating_sub(i)) {
                    out[i + j] = self.add(out[i + j], self.mul(x, y));
                }
            }
            return out;
        }
        let len = (a.len() + b.len() - 1).next_power_of_two();
        assert!(len.trailing_zeros() <= self.rank2, "transform length too large");
        let mut fa = vec![0u32; len];
        fa[..a.len()].copy_from_slice(a);
        let mut fb = vec![0u32; len];
        fb[..b.len()].copy_from_slice(b);
        self.forward(&mut fa);
        self.forward(&mut fb);
        for (x, y) in fa.iter_mut().zip(fb.iter()) {
            *x = self.mul(*x, *y);
        }
        drop(fb);
        self.inverse(&mut fa);
        fa.truncate(n);
        fa.resize(n, 0);
        fa
    }

    /// Truncated square `a^2 mod x^n`, consuming `a`.
    ///
    /// The series is split at `m = ceil(n/2)`: `a^2 = a0^2 + 2 x^m a0 a1 mod x^n`,
    /// which needs transforms of length `>= n` instead of `>= 2n`.
    pub fn square_trunc(&self, mut a: Vec<u32>, n: usize) -> Vec<u32> {
        a.truncate(n);
        a.resize(n, 0);
        if n <= 64 {
            return self.mul_trunc(&a, &a, n);
        }
        let m = n.div_ceil(2);
        let len = n.next_power_of_two();
        assert!(len.trailing_zeros() <= self.rank2, "transform length too large");
        let mut f1 = vec![0u32; len];
        f1[..n - m].copy_from_slice(&a[m..n]);
        // reuse the input buffer for the low half
        let mut f0 = a;
        f0.truncate(m);
        f0.resize(len, 0);
        self.forward(&mut f0);
        self.forward(&mut f1);
        for (x, y) in f0.iter_mut().zip(f1.iter_mut()) {
            let cross = self.mul(*x, *y);
            *y = self.add(cross, cross);
            *x = self.mul(*x, *x);
        }
        self.inverse(&mut f0);
        self.inverse(&mut f1);
        for i in m..n {
            f0[i] = self.add(f0[i], f1[i - m]);
        }
        drop(f1);
        f0.truncate(n);
        f0
    }
}

/// Multi-modular reconstruction of signed integers from residues.
#[derive(Debug, Clone)]
pub struct Crt {
    moduli: Vec<u64>,
    // inverse of (m_0 ... m_{i-1}) modulo m_i
    inv_prefix: Vec<u64>,
    // prefix_mod[i][j] = (m_0 ... m_{j-1}) mod m_i for j < i
    prefix_mod: Vec<Vec<u64>>,
    // mixed-radix digits of floor(M / 2)
    half: Vec<u64>,
    product: BigUint,
}

impl Crt {
    pub fn new(moduli: &[u32]) -> Self {
        let moduli: Vec<u64> = moduli.iter().map(|&m| m as u64).collect();
        let mut inv_prefix = Vec::with_capacity(moduli.len());
        let mut prefix_mod = Vec::with_capacity(moduli.len());
        for (i, &mi) in moduli.iter().enumerate() {
            let mut row = Vec::with_capacity(i);
            let mut prefix = 1u64;
            for &mj in &moduli[..i] {
                row.push(prefix);
                prefix = prefix * mj % mi;
            }
            inv_prefix.push(pow_mod(prefix, mi - 2, mi));
            prefix_mod.push(row);
        }
        let product = moduli
            .iter()
            .fold(BigUint::one(), |acc, &m| acc * BigUint::from(m));
        let mut rest = &product >> 1u32;
        let mut half = Vec::with_capacity(moduli.len());
        for &m in &moduli {
            let m = BigUint::from(m);
            half.push(u64::try_from(&rest % &m).expect("digit below modulus"));
            rest /= m;
        }
        Crt {
            moduli,
            inv_prefix,
            prefix_mod,
            half,
            product,
        }
    }

    /// Number of moduli needed so that signed values with `|v| < 2^bits` are recovered.
    pub fn moduli_for_bits(bits: u32) -> Option<usize> {
        let mut acc = 0.0f64;
        for (i, &(m, _)) in NTT_PRIMES.iter().enumerate() {
            acc += (m as f64).log2();
            if acc >= bits as f64 + 1.5 {
                return Some(i + 1);
            }
        }
        None
    }

    pub fn modulus_bits(&self) -> u64 {
        self.product.bits()
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// Garner digits: `v = d0 + d1 m0 + d2 m0 m1 + ...` with `0 <= v < M`.
    pub fn digits_into(&self, residues: &[u32], out: &mut [u64]) {
        debug_assert_eq!(residues.len(), self.moduli.len());
        for (i, &mi) in self.moduli.iter().enumerate() {
            // all operands are below 2^32, so products fit in u64
            let mut acc = 0u64;
            for (&d, &radix) in out[..i].iter().zip(&self.prefix_mod[i]) {
                acc = (acc + d * radix) % mi;
            }
            let r = residues[i] as u64 % mi;
            let diff = (r + mi - acc) % mi;
            out[i] = diff * self.inv_prefix[i] % mi;
        }
    }

    /// Mixed-radix digits of `|v|` for the symmetric representative; returns true when negative.
    pub fn signed_digits(&self, residues: &[u32], out: &mut [u64]) -> bool {
        self.digits_into(residues, out);
        let k = self.moduli.len();
        let above_half = (0..k)
            .rev()
            .find(|&i| out[i] != self.half[i])
            .is_some_and(|i| out[i] > self.half[i]);
        if !above_half {
            return false;
        }
        // M - v = sum (m_i - 1 - d_i) M_i + 1
        let mut carry = 1u64;
        for (d, &m) in out[..k].iter_mut().zip(&self.moduli) {
            let c = m - 1 - *d + carry;
            carry = (c == m) as u64;
            *d = if c == m { 0 } else { c };
        }
        true
    }

    /// Reconstruct the symmetric representative in `(-M/2, M/2]`.
    pub fn reconstruct(&self, residues: &[u32]) -> BigInt {
        let mut digits = vec![0u64; self.moduli.len()];
        let negative = self.signed_digits(residues, &mut digits);
        let mut v = BigUint::zero();
        for (d, &m) in digits.iter().zip(self.moduli.iter()).rev() {
            v = v * BigUint::from(m) + BigUint::from(*d);
        }
        if negative {
            -BigInt::from(v)
        } else {
            BigInt::from(v)
        }
    }
}

pub fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % m as u128) as u64;
        }
        base = (base as u128 * base as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

#[cfg(target_arch = "x86_64")]
mod simd {
    //! AVX2 kernels. Large stages run on gathered column strips, small stages
    //! on contiguous rows of `2^ROW_LOG` elements; each pass touches memory once.

    use super::{FastTables, Modulus, ROW_LOG, STRIP};
    use std::arch::x86_64::*;

    pub fn available() -> bool {
        is_x86_feature_detected!("avx2")
    }

    #[derive(Clone, Copy)]
    struct Ctx {
        m: __m256i,
        m_inv: __m256i,
    }

    #[target_feature(enable = "avx2")]
    #[inline]
    fn ctx(md: &Modulus) -> Ctx {
        Ctx {
            m: _mm256_set1_epi32(md.m as i32),
            m_inv: _mm256_set1_epi32(md.m_inv as i32),
        }
    }

    #[target_feature(enable = "avx2")]
    #[inline]
    fn vmul(c: Ctx, a: __m256i, b: __m256i) -> __m256i {
        let pe = _mm256_mul_epu32(a, b);
        let po = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), _mm256_srli_epi64(b, 32));
        let me = _mm256_mul_epu32(_mm256_mul_epu32(pe, c.m_inv), c.m);
        let mo = _mm256_mul_epu32(_mm256_mul_epu32(po, c.m_inv), c.m);
        let hi = _mm256_blend_epi32(_mm256_srli_epi64(pe, 32), po, 0b1010_1010);
        let mh = _mm256_blend_epi32(_mm256_srli_epi64(me, 32), mo, 0b1010_1010);
        let r = _mm256_sub_epi32(hi, mh);
        let ge = _mm256_cmpeq_epi32(_mm256_max_epu32(hi, mh), hi);
        _mm256_blendv_epi8(_mm256_add_epi32(r, c.m), r, ge)
    }

    #[target_feature(enable = "avx2")]
    #[inline]
    fn vadd(c: Ctx, a: __m256i, b: __m256i) -> __m256i {
        let nb = _mm256_sub_epi32(c.m, b);
        let d = _mm256_sub_epi32(a, nb);
        let ge = _mm256_cmpeq_epi32(_mm256_max_epu32(a, nb), a);
        _mm256_blendv_epi8(_mm256_add_epi32(a, b), d, ge)
    }

    #[target_feature(enable = "avx2")]
    #[inline]
    fn vsub(c: Ctx, a: __m256i, b: __m256i) -> __m256i {
        let d = _mm256_sub_epi32(a, b);
        let ge = _mm256_cmpeq_epi32(_mm256_max_epu32(a, b), a);
        _mm256_blendv_epi8(_mm256_add_epi32(d, c.m), d, ge)
    }

    #[target_feature(enable = "avx2")]
    #[inline]
    fn fwd_bfly(c: Ctx, l: __m256i, r: __m256i, w: __m256i) -> (__m256i, __m256i) {
        let y = vmul(c, r, w);
        (vadd(c, l, y), vsub(c, l, y))
    }

    #[target_feature(enable = "avx2")]
    #[inline]
    fn inv_bfly(c: Ctx, l: __m256i, r: __m256i, w: __m256i) -> (__m256i, __m256i) {
        (vadd(c, l, r), vmul(c, vsub(c, l, r), w))
    }


    #[derive(Clone, Copy)]
    struct Ctx512 {
        m: __m512i,
        m_inv: __m512i,
    }

    pub fn has_avx512() -> bool {
        is_x86_feature_detected!("avx512f")
    }

    #[target_feature(enable = "avx512f")]
    #[inline]
    fn ctx512(md: &Modulus) -> Ctx512 {
        Ctx512 {
            m: _mm512_set1_epi32(md.m as i32),
            m_inv: _mm512_set1_epi32(md.m_inv as i32),
        }
    }

    #[target_feature(enable = "avx512f")]
    #[inline]
    fn zmul(c: Ctx512, a: __m512i, b: __m512i) -> __m512i {
        let pe = _mm512_mul_epu32(a, b);
        let po = _mm512_mul_epu32(_mm512_srli_epi64(a, 32), _mm512_srli_epi64(b, 32));
        let me = _mm512_mul_epu32(_mm512_mul_epu32(pe, c.m_inv), c.m);
        let mo = _mm512_mul_epu32(_mm512_mul_epu32(po, c.m_inv), c.m);
        let hi = _mm512_mask_blend_epi32(0xAAAA, _mm512_srli_epi64(pe, 32), po);
        let mh = _mm512_mask_blend_epi32(0xAAAA, _mm512_srli_epi64(me, 32), mo);
        let r = _mm512_sub_epi32(hi, mh);
        let lt = _mm512_cmplt_epu32_mask(hi, mh);
        _mm512_mask_add_epi32(r, lt, r, c.m)
    }

    #[target_feature(enable = "avx512f")]
    #[inline]
    fn zadd(c: Ctx512, a: __m512i, b: __m512i) -> __m512i {
        let s = _mm512_add_epi32(a, b);
        let ge = _mm512_cmpge_epu32_mask(a, _mm512_sub_epi32(c.m, b));
        _mm512_mask_sub_epi32(s, ge, s, c.m)
    }

    #[target_feature(enable = "avx512f")]
    #[inline]
    fn zsub(c: Ctx512, a: __m512i, b: __m512i) -> __m512i {
        let d = _mm512_sub_epi32(a, b);
        let lt = _mm512_cmplt_epu32_mask(a, b);
        _mm512_mask_add_epi32(d, lt, d, c.m)
    }

    #[target_feature(enable = "avx512f")]
    #[inline]
    unsafe fn zbfly(c: Ctx512, lp: *mut u32, rp: *mut u32, w: __m512i, inverse: bool) {
        let l = _mm512_loadu_si512(lp as *const _);
        let r = _mm512_loadu_si512(rp as *const _);
        let (x, y) = if inverse {
            (zadd(c, l, r), zmul(c, zsub(c, l, r), w))
        } else {
            let t = zmul(c, r, w);
            (zadd(c, l, t), zsub(c, l, t))
        };
        _mm512_storeu_si512(lp as *mut _, x);
        _mm512_storeu_si512(rp as *mut _, y);
    }

    #[target_feature(enable = "avx512f")]
    unsafe fn wide_stage512(
        md: &Modulus,
        row: &mut [u32],
        p: usize,
        base: u32,
        tw: &[u32],
        inverse: bool,
    ) {
        let c = ctx512(md);
        let ptr = row.as_mut_ptr();
        let blocks = row.len() / (2 * p);
        for lb in 0..blocks {
            let w = _mm512_set1_epi32(md.mul(base, tw[lb]) as i32);
            let off = lb * 2 * p;
            for i in (0..p).step_by(16) {
                zbfly(c, ptr.wrapping_add(off + i), ptr.wrapping_add(off + i + p), w, inverse);
            }
        }
    }

    #[target_feature(enable = "avx512f")]
    unsafe fn strip_stages512(
        md: &Modulus,
        bp: *mut u32,
        k: u32,
        tw: &[u32],
        inverse: bool,
    ) {
        let c = ctx512(md);
        let stage = |ph: u32| {
            let pr = 1usize << (k - ph);
            for s in 0..(1usize << (ph - 1)) {
                let w = _mm512_set1_epi32(tw[s] as i32);
                for r in s * 2 * pr..s * 2 * pr + pr {
                    for v in (0..STRIP).step_by(16) {
                        zbfly(c, bp.wrapping_add(r * STRIP + v), bp.wrapping_add((r + pr) * STRIP + v), w, inverse);
                    }
                }
            }
        };
        if inverse {
            for ph in (1..=k).rev() {
                stage(ph);
            }
        } else {
            for ph in 1..=k {
                stage(ph);
            }
        }
    }

    #[inline(always)]
    unsafe fn load(p: *const u32) -> __m256i {
        _mm256_loadu_si256(p as *const __m256i)
    }

    #[inline(always)]
    unsafe fn store(p: *mut u32, v: __m256i) {
        _mm256_storeu_si256(p as *mut __m256i, v)
    }

    /// Stages with half-width `p >= 8` on one contiguous row.
    #[target_feature(enable = "avx2")]
    unsafe fn wide_stage(
        c: Ctx,
        md: &Modulus,
        row: &mut [u32],
        p: usize,
        base: u32,
        tw: &[u32],
        inverse: bool,
    ) {
        let ptr = row.as_mut_ptr();
        let blocks = row.len() / (2 * p);
        for lb in 0..blocks {
            let w = _mm256_set1_epi32(md.mul(base, tw[lb]) as i32);
            let off = lb * 2 * p;
            for i in (0..p).step_by(8) {
                let lp = ptr.wrapping_add(off + i);
                let rp = ptr.wrapping_add(off + i + p);
                let (x, y) = if inverse {
                    inv_bfly(c, load(lp), load(rp), w)
                } else {
                    fwd_bfly(c, load(lp), load(rp), w)
                };
                store(lp, x);
                store(rp, y);
            }
        }
    }

    /// One of the three narrow stages (`p` in {4, 2, 1}) on a contiguous row.
    #[target_feature(enable = "avx2")]
    unsafe fn narrow_stage(
        c: Ctx,
        row: &mut [u32],
        p: usize,
        base: u32,
        lanes: &[u32],
        inverse: bool,
    ) {
        let ptr = row.as_mut_ptr();
        let basev = _mm256_set1_epi32(base as i32);
        for g in 0..row.len() / 16 {
            let p0 = ptr.wrapping_add(16 * g);
            let p1 = ptr.wrapping_add(16 * g + 8);
            let v0 = load(p0);
            let v1 = load(p1);
            let w = vmul(c, basev, load(lanes.as_ptr().wrapping_add(8 * g)));
            let (l, r) = match p {
                4 => (
                    _mm256_permute2x128_si256(v0, v1, 0x20),
                    _mm256_permute2x128_si256(v0, v1, 0x31),
                ),
                2 => (_mm256_unpacklo_epi64(v0, v1), _mm256_unpackhi_epi64(v0, v1)),
                _ => {
                    let s0 = _mm256_shuffle_epi32(v0, 0b11_01_10_00);
                    let s1 = _mm256_shuffle_epi32(v1, 0b11_01_10_00);
                    (_mm256_unpacklo_epi64(s0, s1), _mm256_unpackhi_epi64(s0, s1))
                }
            };
            let (l, r) = if inverse {
                inv_bfly(c, l, r, w)
            } else {
                fwd_bfly(c, l, r, w)
            };
            let (o0, o1) = match p {
                4 => (
                    _mm256_permute2x128_si256(l, r, 0x20),
                    _mm256_permute2x128_si256(l, r, 0x31),
                ),
                2 => (_mm256_unpacklo_epi64(l, r), _mm256_unpackhi_epi64(l, r)),
                _ => (
                    _mm256_shuffle_epi32(_mm256_unpacklo_epi64(l, r), 0b11_01_10_00),
                    _mm256_shuffle_epi32(_mm256_unpackhi_epi64(l, r), 0b11_01_10_00),
                ),
            };
            store(p0, o0);
            store(p1, o1);
        }
    }

    #[target_feature(enable = "avx2")]
    unsafe fn row_stages(
        c: Ctx,
        md: &Modulus,
        t: &FastTables,
        row: &mut [u32],
        row_index: usize,
        inverse: bool,
    ) {
        let q = row.len().trailing_zeros();
        let (tw, lanes) = if inverse {
            (&t.itw, &t.ilanes)
        } else {
            (&t.tw, &t.lanes)
        };
        let wide512 = has_avx512();
        let mut run = |lp: u32| {
            let p = 1usize << lp;
            let blocks = row.len() >> (lp + 1);
            let base = md.block_twiddle(row_index * blocks, inverse);
            match p {
                4 => narrow_stage(c, row, p, base, &lanes[0], inverse),
                2 => narrow_stage(c, row, p, base, &lanes[1], inverse),
                1 => narrow_stage(c, row, p, base, &lanes[2], inverse),
                _ if p >= 16 && wide512 => wide_stage512(md, row, p, base, tw, inverse),
                _ => wide_stage(c, md, row, p, base, tw, inverse),
            }
        };
        if inverse {
            for lp in 0..q {
                run(lp);
            }
        } else {
            for lp in (0..q).rev() {
                run(lp);
            }
        }
    }

    /// Stages whose butterflies span whole rows, applied to gathered column strips.
    #[target_feature(enable = "avx2")]
    unsafe fn column_stages(
        c: Ctx,
        md: &Modulus,
        t: &FastTables,
        a: &mut [u32],
        k: u32,
        inverse: bool,
        scale: Option<u32>,
    ) {
        let rows = 1usize << k;
        let wc = a.len() >> k;
        let mut buf = vec![0u32; rows * STRIP];
        let bp = buf.as_mut_ptr();
        let ap = a.as_mut_ptr();
        let tw = if inverse { &t.itw } else { &t.tw };
        let use512 = has_avx512();
        for col in (0..wc).step_by(STRIP) {
            for r in 0..rows {
                std::ptr::copy_nonoverlapping(ap.wrapping_add(r * wc + col), bp.wrapping_add(r * STRIP), STRIP);
            }
            if use512 {
                strip_stages512(md, bp, k, tw, inverse);
            } else {
            let stage = |ph: u32| {
                let pr = 1usize << (k - ph);
                for s in 0..(1usize << (ph - 1)) {
                    let w = _mm256_set1_epi32(tw[s] as i32);
                    for r in s * 2 * pr..s * 2 * pr + pr {
                        for v in (0..STRIP).step_by(8) {
                            let lp = bp.wrapping_add(r * STRIP + v);
                            let rp = bp.wrapping_add((r + pr) * STRIP + v);
                            let (x, y) = if inverse {
                                inv_bfly(c, load(lp), load(rp), w)
                            } else {
                                fwd_bfly(c, load(lp), load(rp), w)
                            };
                            store(lp, x);
                            store(rp, y);
                        }
                    }
                }
            };
            if inverse {
                for ph in (1..=k).rev() {
                    stage(ph);
                }
            } else {
                for ph in 1..=k {
                    stage(ph);
                }
            }
            }
            if let Some(sc) = scale {
                let sv = _mm256_set1_epi32(sc as i32);
                for i in (0..rows * STRIP).step_by(8) {
                    store(bp.wrapping_add(i), vmul(c, load(bp.wrapping_add(i)), sv));
                }
            }
            for r in 0..rows {
                std::ptr::copy_nonoverlapping(bp.wrapping_add(r * STRIP), ap.wrapping_add(r * wc + col), STRIP);
            }
        }
    }

    #[target_feature(enable = "avx2")]
    pub unsafe fn forward(md: &Modulus, t: &FastTables, a: &mut [u32]) {
        let c = ctx(md);
        let h = a.len().trailing_zeros();
        let q = ROW_LOG.min(h);
        let k = h - q;
        if k > 0 {
            column_stages(c, md, t, a, k, false, None);
        }
        for (ri, row) in a.chunks_exact_mut(1 << q).enumerate() {
            row_stages(c, md, t, row, ri, false);
        }
    }

    #[target_feature(enable = "avx2")]
    pub unsafe fn inverse(md: &Modulus, t: &FastTables, a: &mut [u32]) {
        let c = ctx(md);
        let n = a.len();
        let h = n.trailing_zeros();
        let q = ROW_LOG.min(h);
        let k = h - q;
        for (ri, row) in a.chunks_exact_mut(1 << q).enumerate() {
            row_stages(c, md, t, row, ri, true);
        }
        let scale = md.inv(md.to_mont(n as u32 % md.m));
        if k > 0 {
            column_stages(c, md, t, a, k, true, Some(scale));
        } else {
            let sv = _mm256_set1_epi32(scale as i32);
            for chunk in a.chunks_exact_mut(8) {
                store(chunk.as_mut_ptr(), vmul(c, load(chunk.as_ptr()), sv));
            }
        }
    }
}

#[cfg(not(target_arch = "x86_64"))]
mod simd {
    use super::{FastTables, Modulus};

    pub fn available() -> bool {
        false
    }

    pub unsafe fn forward(_: &Modulus, _: &FastTables, _: &mut [u32]) {
        unreachable!()
    }

    pub unsafe fn inverse(_: &Modulus, _: &FastTables, _: &mut [u32]) {
        unreachable!()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[i64], b: &[i64], n: usize) -> Vec<i64> {
        let mut out = vec![0i64; n];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                if i + j < n {
                    out[i + j] += x * y;
                }
            }
        }
        out
    }

    fn lcg(seed: &mut u64) -> i64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 40) as i64 % 2001) - 1000
    }

    #[test]
    fn montgomery_roundtrip_and_inverse() {
        for &(m, g) in &NTT_PRIMES {
            let md = Modulus::new(m, g);
            for a in [0u32, 1, 2, 12345, m - 1] {
                assert_eq!(md.from_mont(md.to_mont(a)), a);
            }
            let x = md.to_mont(987_654_321 % m);
            assert_eq!(md.from_mont(md.mul(x, md.inv(x))), 1);
            // generator has full order
            let gm = md.to_mont(g);
            assert_ne!(md.from_mont(md.pow(gm, (m as u64 - 1) / 2)), 1);
        }
    }

    #[test]
    fn products_match_schoolbook_across_sizes() {
        let mut seed = 7u64;
        for &len in &[1usize, 3, 40, 100, 1000, 70_000, 140_000] {
            let a: Vec<i64> = (0..len).map(|_| lcg(&mut seed)).collect();
            let b: Vec<i64> = (0..len / 2 + 1).map(|_| lcg(&mut seed)).collect();
            let n = len + 7;
            let check: Vec<usize> = if len <= 1000 {
                (0..n).collect()
            } else {
                (0..n).step_by(997).chain([n - 1, n - 8]).collect()
            };
            let expect = if len <= 1000 {
                naive(&a, &b, n)
            } else {
                let mut e = vec![0i64; n];
                for &k in &check {
                    let mut s = 0i64;
                    for i in 0..=k.min(a.len() - 1) {
                        if k - i < b.len() {
                            s += a[i] * b[k - i];
                        }
                    }
                    e[k] = s;
                }
                e
            };
            for &(m, g) in &NTT_PRIMES[..2] {
                let md = Modulus::new(m, g);
                let am: Vec<u32> = a.iter().map(|&v| md.from_i64(v)).collect();
                let bm: Vec<u32> = b.iter().map(|&v| md.from_i64(v)).collect();
                let prod = md.mul_trunc(&am, &bm, n);
                for &k in &check {
                    assert_eq!(md.from_mont(prod[k]), md.from_mont(md.from_i64(expect[k])), "k={k}");
                }
            }
        }
    }

    #[test]
    fn vectorized_transform_matches_portable() {
        let mut seed = 3u64;
        for &(m, g) in &NTT_PRIMES {
            let md = Modulus::new(m, g);
            for log in [5u32, 6, 10, 16, 17, 19, 21] {
                let a: Vec<u32> = (0..1usize << log).map(|_| md.from_i64(lcg(&mut seed))).collect();
                let mut fast = a.clone();
                let mut slow = a.clone();
                md.forward(&mut fast);
                md.forward_scalar(&mut slow);
                assert_eq!(fast, slow, "forward m={m} log={log}");
                md.inverse(&mut fast);
                md.inverse_scalar(&mut slow);
                assert_eq!(fast, slow, "inverse m={m} log={log}");
                assert_eq!(fast, a);
            }
        }
    }

    #[test]
    fn split_square_matches_product() {
        let mut seed = 11u64;
        let md = Modulus::new(NTT_PRIMES[3].0, NTT_PRIMES[3].1);
        for &n in &[65usize, 99, 1024, 1025, 77_777] {
            let a: Vec<u32> = (0..n).map(|_| md.from_i64(lcg(&mut seed))).collect();
            let sq = md.square_trunc(a.clone(), n);
            let pr = md.mul_trunc(&a, &a, n);
            assert_eq!(sq, pr, "n={n}");
        }
    }

    #[test]
    fn crt_recovers_signed_values() {
        let moduli: Vec<u32> = NTT_PRIMES.iter().map(|p| p.0).collect();
        let crt = Crt::new(&moduli);
        let big: BigInt = BigInt::from(-3) * BigInt::from(10u64).pow(40) + 17;
        let half = BigInt::from(&crt.product >> 1u32);
        let edge = [half.clone(), -half.clone(), &half - 1, 1 - &half];
        let small = [0i64, 1, -1, -24, 252].map(BigInt::from);
        for v in small.into_iter().chain(edge).chain([big]) {
            let residues: Vec<u32> = moduli
                .iter()
                .map(|&m| {
                    let r = &v % BigInt::from(m);
                    let r = if r < BigInt::zero() { r + m } else { r };
                    u32::try_from(r).unwrap()
                })
                .collect();
            assert_eq!(crt.reconstruct(&residues), v);
        }
        assert!(crt.modulus_bits() >= 155);
        assert_eq!(Crt::moduli_for_bits(20), Some(1));
        assert_eq!(Crt::moduli_for_bits(149), Some(5));
        assert_eq!(Crt::moduli_for_bits(200), None);
    }
}
