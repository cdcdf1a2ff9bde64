use super::dplus::admissible_desc;
use super::params::SieveParams;
use crate::arith::{isqrt, primes_up_to};
use crate::error::{Error, Result};
use crate::multeval::{evaluate_window, sign_of, CoefficientWindow, MultiplicativeSpec};

/// Widest window for the w″ diagnostics.
pub const MAJORANT_WINDOW_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightWindow {
    pub lo: u64,
    pub hi: u64,
    pub w: Vec<f64>,
    pub w_prime: Vec<f64>,
    pub w_doubleprime: Option<Vec<f64>>,
}

/// w″ with its per-r pieces and the multiplicative majorants G_r.
#[derive(Debug, Clone, PartialEq)]
pub struct Majorant {
    pub weights: WeightWindow,
    /// Last r computed; the r-summand is constant from here on because y_(2r+1) < 2.
    pub r_max: u32,
    /// `summands[r][i]`: inner sum of w″ at r, without the 2^(-2r) factor.
    pub summands: Vec<Vec<f64>>,
    /// `g[r][i]`: G_r(n).
    pub g: Vec<Vec<f64>>,
    /// Count of n with w > w′ + w″.
    pub sandwich_violations: usize,
    /// Count of (r, n) with summand > G_r(n).
    pub domination_violations: usize,
}

/// Prime factorizations of every n in a window, stored contiguously.
pub(crate) struct WindowFactors {
    start: Vec<u32>,
    factors: Vec<(u64, u32)>,
}

impl WindowFactors {
    pub fn new(lo: u64, hi: u64) -> Self {
        let len = (hi - lo) as usize;
        let mut rest: Vec<u64> = (lo..hi).collect();
        let mut found: Vec<(u32, u64, u32)> = Vec::new();
        for p in primes_up_to(isqrt(hi - 1)) {
            let mut m = lo.div_ceil(p) * p;
            while m < hi {
                let i = (m - lo) as usize;
                let mut e = 0;
                while rest[i].is_multiple_of(p) {
                    rest[i] /= p;
                    e += 1;
                }
                found.push((i as u32, p, e));
                m += p;
            }
        }
        for (i, &r) in rest.iter().enumerate() {
            if r > 1 {
                found.push((i as u32, r, 1));
            }
        }
        // counting sort by index keeps primes ascending within each n
        let mut start = vec![0u32; len + 1];
        for &(i, _, _) in &found {
            start[i as usize + 1] += 1;
        }
        for i in 0..len {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut factors = vec![(0u64, 0u32); found.len()];
        for (i, p, e) in found {
            factors[fill[i as usize] as usize] = (p, e);
            fill[i as usize] += 1;
        }
        WindowFactors { start, factors }
    }

    pub fn of(&self, i: usize) -> &[(u64, u32)] {
        &self.factors[self.start[i] as usize..self.start[i + 1] as usize]
    }
}

struct Context<'a> {
    params: &'a SieveParams,
    spec: &'a MultiplicativeSpec,
    /// λ(q) for primes q <= y, indexed by q.
    small: Vec<f64>,
    threshold: f64,
    r_max: u32,
    /// y_(2r+1) for r = 0..=r_max
    ys: Vec<f64>,
}

impl<'a> Context<'a> {
    fn new(params: &'a SieveParams, spec: &'a MultiplicativeSpec) -> Result<Self> {
        let mut small = vec![0.0; params.y as usize + 1];
        for q in primes_up_to(params.y) {
            small[q as usize] = spec.value(q, 1)?;
        }
        let mut r_max = 0;
        while params.y_m(2 * r_max + 1) >= 2.0 {
            r_max += 1;
        }
        let ys = (0..=r_max).map(|r| params.y_m(2 * r + 1)).collect();
        Ok(Context {
            params,
            spec,
            small,
            threshold: spec.zero_threshold(),
            r_max,
            ys,
        })
    }
}

struct Terms {
    w: f64,
    w_prime: f64,
    w_doubleprime: f64,
}

/// Weights at one n. `summands` receives the per-r inner sums when given.
fn weights_at(
    cx: &Context<'_>,
    factors: &[(u64, u32)],
    lambda_n: f64,
    mut summands: Option<&mut [f64]>,
) -> Terms {
    let y = cx.params.y;
    let y1 = cx.params.y1();
    let abs_n = lambda_n.abs();
    // primes that may go into a: exponent one, at most y
    let cand: Vec<usize> = (0..factors.len())
        .filter(|&i| factors[i].1 == 1 && factors[i].0 <= y)
        .collect();
    let smooth_count = factors.iter().filter(|f| f.0 <= y).count();
    let mut out = Terms {
        w: 0.0,
        w_prime: 0.0,
        w_doubleprime: 0.0,
    };
    let mut in_a = vec![false; factors.len()];
    for mask in 0u32..(1 << cand.len()) {
        let mut a = 1u64;
        let mut lambda_a = 1.0;
        for (k, &i) in cand.iter().enumerate() {
            let sel = mask >> k & 1 == 1;
            in_a[i] = sel;
            if sel {
                a = a.saturating_mul(factors[i].0);
                lambda_a *= cx.small[factors[i].0 as usize];
            }
        }
        if a > y || sign_of(lambda_a, cx.threshold) == 0 {
            continue;
        }
        let abs_b = abs_n / lambda_a.abs();

        // ρ⁺(b): signed count of admissible subsets of b's primes up to y_1
        let sievable: Vec<u64> = (0..factors.len())
            .rev()
            .filter(|&i| !in_a[i] && factors[i].0 as f64 <= y1)
            .map(|i| factors[i].0)
            .collect();
        let mut rho = 0i64;
        let mut pick: Vec<u64> = Vec::with_capacity(sievable.len());
        for dm in 0u32..(1 << sievable.len()) {
            pick.clear();
            pick.extend((0..sievable.len()).filter(|k| dm >> k & 1 == 1).map(|k| sievable[k]));
            if admissible_desc(&pick, cx.params) {
                rho += if pick.len().is_multiple_of(2) { 1 } else { -1 };
            }
        }
        out.w += rho as f64 * abs_b;

        let size_a = mask.count_ones() as usize;
        if size_a == smooth_count && size_a == cand.len() {
            // b is y-rough, so this is the single w′ term and ρ⁺(b) = 1
            out.w_prime = abs_b;
        }

        let omega_b = factors.len() - size_a;
        let least_b = (0..factors.len())
            .find(|&i| !in_a[i])
            .map_or(f64::INFINITY, |i| factors[i].0 as f64);
        let r_a = cx.ys.iter().position(|&ym| least_b > ym).unwrap_or(cx.r_max as usize);
        let base = abs_b * 4f64.powi(omega_b as i32);
        out.w_doubleprime += base * 4f64.powi(-(r_a as i32)) * (4.0 / 3.0);
        if let Some(s) = summands.as_deref_mut() {
            for v in &mut s[r_a..] {
                *v += base;
            }
        }
    }
    out
}

/// G_r(n) from the local factors: 1[λ(p) ≠ 0] for p <= y_(2r+1), ν = 1;
/// 1 + 4|λ(p)| or 4|λ(p^ν)| + 4|λ(p^(ν-1))| for p >= y_(2r+1).
fn majorant_at(cx: &Context<'_>, factors: &[(u64, u32)], r: usize) -> Result<f64> {
    let ym = cx.ys[r];
    let mut g = 1.0;
    for &(p, e) in factors {
        let pf = p as f64;
        let mut local = 0.0;
        if pf <= ym && e == 1 && sign_of(cx.spec.value(p, 1)?, cx.threshold) != 0 {
            local += 1.0;
        }
        if pf >= ym {
            local += if e == 1 {
                1.0 + 4.0 * cx.spec.value(p, 1)?.abs()
            } else {
                4.0 * cx.spec.value(p, e)?.abs() + 4.0 * cx.spec.value(p, e - 1)?.abs()
            };
        }
        g *= local;
    }
    Ok(g)
}

pub(crate) fn weights_for(
    params: &SieveParams,
    spec: &MultiplicativeSpec,
    lambda: &CoefficientWindow,
) -> Result<WeightWindow> {
    let cx = Context::new(params, spec)?;
    let wf = WindowFactors::new(lambda.lo, lambda.hi);
    let len = lambda.len();
    let mut w = Vec::with_capacity(len);
    let mut w_prime = Vec::with_capacity(len);
    for i in 0..len {
        let t = weights_at(&cx, wf.of(i), lambda.values[i], None);
        w.push(t.w);
        w_prime.push(t.w_prime);
    }
    Ok(WeightWindow {
        lo: lambda.lo,
        hi: lambda.hi,
        w,
        w_prime,
        w_doubleprime: None,
    })
}

/// w and w′ on `[lo, hi)`.
pub fn weights_window(
    params: &SieveParams,
    spec: &MultiplicativeSpec,
    lo: u64,
    hi: u64,
) -> Result<WeightWindow> {
    let lambda = evaluate_window(spec, lo, hi)?;
    weights_for(params, spec, &lambda)
}

/// w, w′, w″ and the G_r majorants on `[lo, hi)`, with the sandwich and domination checks.
pub fn wpp_majorant(
    params: &SieveParams,
    spec: &MultiplicativeSpec,
    lo: u64,
    hi: u64,
) -> Result<Majorant> {
    if hi.saturating_sub(lo) > MAJORANT_WINDOW_LIMIT {
        return Err(Error::capacity("majorant window width", MAJORANT_WINDOW_LIMIT));
    }
    let lambda = evaluate_window(spec, lo, hi)?;
    let cx = Context::new(params, spec)?;
    let wf = WindowFactors::new(lo, hi);
    let len = lambda.len();
    let rs = cx.r_max as usize + 1;
    let mut weights = WeightWindow {
        lo,
        hi,
        w: Vec::with_capacity(len),
        w_prime: Vec::with_capacity(len),
        w_doubleprime: Some(Vec::with_capacity(len)),
    };
    let mut summands = vec![Vec::with_capacity(len); rs];
    let mut g = vec![Vec::with_capacity(len); rs];
    let mut per_r = vec![0.0; rs];
    let (mut sandwich_violations, mut domination_violations) = (0, 0);
    for i in 0..len {
        per_r.fill(0.0);
        let f = wf.of(i);
        let t = weights_at(&cx, f, lambda.values[i], Some(&mut per_r));
        if t.w > (t.w_prime + t.w_doubleprime) * (1.0 + 1e-12) || t.w_prime > t.w || t.w_prime < 0.0 {
            sandwich_violations += 1;
        }
        for r in 0..rs {
            let gr = majorant_at(&cx, f, r)?;
            if per_r[r] > gr * (1.0 + 1e-12) {
                domination_violations += 1;
            }
            summands[r].push(per_r[r]);
            g[r].push(gr);
        }
        weights.w.push(t.w);
        weights.w_prime.push(t.w_prime);
        weights.w_doubleprime.as_mut().unwrap().push(t.w_doubleprime);
    }
    Ok(Majorant {
        weights,
        r_max: cx.r_max,
        summands,
        g,
        sandwich_violations,
        domination_violations,
    })
}
