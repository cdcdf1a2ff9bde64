use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multeval::CoefficientWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftParams {
    pub a: u64,
    pub b: u64,
    #[serde(rename = "A")]
    pub big_a: u64,
    #[serde(rename = "B")]
    pub big_b: u64,
    pub h: i64,
}

impl ShiftParams {
    /// a = b = A = B = 1.
    pub fn plain(h: i64) -> Self {
        ShiftParams {
            a: 1,
            b: 1,
            big_a: 1,
            big_b: 1,
            h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedConvolution {
    #[serde(flatten)]
    pub shift: ShiftParams,
    #[serde(rename = "X")]
    pub x: u64,
    pub sum: f64,
    pub terms: u64,
    /// False when gcd(aA, bB) does not divide h.
    pub solvable: bool,
    /// log|sum| / log X, absent for a zero sum.
    pub exponent: Option<f64>,
}

/// Σ λ(Am) λ(Bn) over X <= aAm, bBn <= 2X with aAm - bBn = h.
/// `window` must start at 1 and cover [1, 2X].
pub fn shifted_convolution(window: &CoefficientWindow, shift: ShiftParams, x: u64) -> Result<ShiftedConvolution> {
    let ShiftParams { a, b, big_a, big_b, h } = shift;
    if a == 0 || b == 0 || big_a == 0 || big_b == 0 {
        return Err(Error::param("a, b, A, B must be positive"));
    }
    if window.lo != 1 || window.hi <= 2 * x {
        return Err(Error::OutOfRange {
            value: 2 * x,
            limit: window.hi.saturating_sub(1),
        });
    }
    let mut out = ShiftedConvolution {
        shift,
        x,
        sum: 0.0,
        terms: 0,
        solvable: true,
        exponent: None,
    };
    let alpha = (a * big_a) as i128;
    let beta = (b * big_b) as i128;
    let eg = alpha.extended_gcd(&beta);
    let g = eg.gcd;
    if (h as i128) % g != 0 {
        out.solvable = false;
        return Ok(out);
    }
    // α' m ≡ h' (mod β'), with eg.x the inverse of α' mod β'
    let step = beta / g;
    let base = ((h as i128 / g) * eg.x).rem_euclid(step);
    let (lo, hi) = (x as i128, 2 * x as i128);
    let m_lo = (lo + alpha - 1) / alpha;
    let mut m = m_lo + (base - m_lo).rem_euclid(step);
    while alpha * m <= hi {
        let bn = alpha * m - h as i128;
        if bn >= lo && bn <= hi {
            let n = bn / beta;
            out.sum += window.value((big_a as i128 * m) as u64) * window.value((big_b as i128 * n) as u64);
            out.terms += 1;
        }
        m += step;
    }
    if out.sum != 0.0 {
        out.exponent = Some(out.sum.abs().ln() / (x as f64).ln());
    }
    Ok(out)
}
