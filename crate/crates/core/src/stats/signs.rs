use serde::Serialize;

use crate::error::{Error, Result};
use crate::multeval::CoefficientWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignCounts {
    pub n_pos: u64,
    pub n_neg: u64,
    pub n_zero: u64,
}

impl SignCounts {
    pub fn nonzero(&self) -> u64 {
        self.n_pos + self.n_neg
    }

    /// n_pos / n_neg, infinite when nothing is negative.
    pub fn ratio(&self) -> f64 {
        self.n_pos as f64 / self.n_neg as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignReport {
    #[serde(rename = "X")]
    pub x: u64,
    pub n_pos: u64,
    pub n_neg: u64,
    pub n_zero: u64,
    pub sign_changes: u64,
    pub chowla_sum: i64,
}

impl SignReport {
    pub fn counts(&self) -> SignCounts {
        SignCounts {
            n_pos: self.n_pos,
            n_neg: self.n_neg,
            n_zero: self.n_zero,
        }
    }
}

pub fn sign_counts(signs: &[i8]) -> SignCounts {
    let mut c = SignCounts {
        n_pos: 0,
        n_neg: 0,
        n_zero: 0,
    };
    for &s in signs {
        match s.signum() {
            1 => c.n_pos += 1,
            -1 => c.n_neg += 1,
            _ => c.n_zero += 1,
        }
    }
    c
}

/// Changes between consecutive nonzero signs; zeros are skipped.
pub fn sign_changes(signs: &[i8]) -> u64 {
    let mut last = 0i8;
    let mut changes = 0;
    for &s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

/// Same count, by materializing the nonzero subsequence first.
pub fn sign_changes_brute(signs: &[i8]) -> u64 {
    let nonzero: Vec<i8> = signs.iter().copied().filter(|&s| s != 0).collect();
    nonzero.windows(2).filter(|w| w[0] != w[1]).count() as u64
}

/// Σ sgn(λ(n)) sgn(λ(n+1)) over consecutive pairs of the slice.
pub fn chowla_correlation(signs: &[i8]) -> i64 {
    signs.windows(2).map(|w| (w[0] * w[1]) as i64).sum()
}

/// Full sign statistics for n <= X from a window starting at 1.
pub fn sign_report(window: &CoefficientWindow) -> Result<SignReport> {
    if window.lo != 1 {
        return Err(Error::param(format!("sign statistics need a window starting at 1, got {}", window.lo)));
    }
    let c = sign_counts(&window.signs);
    Ok(SignReport {
        x: window.len() as u64,
        n_pos: c.n_pos,
        n_neg: c.n_neg,
        n_zero: c.n_zero,
        sign_changes: sign_changes(&window.signs),
        chowla_sum: chowla_correlation(&window.signs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(sign_changes(&[1, 0, 1, -1]), 1);
        assert_eq!(sign_changes(&[1; 10]), 0);
        assert_eq!(sign_changes(&[0, -1, 0, 0, 1, 0]), 1);
        assert_eq!(chowla_correlation(&[1; 10]), 9);
        let alt: Vec<i8> = (0..10).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        assert_eq!(chowla_correlation(&alt), -9);
        assert_eq!(chowla_correlation(&[1, 0, -1]), 0);
        let c = sign_counts(&[1, -1, 0, 1]);
        assert_eq!((c.n_pos, c.n_neg, c.n_zero), (2, 1, 1));
    }

    #[test]
    fn report_needs_origin() {
        let w = CoefficientWindow::from_signs(2, vec![1, 1]);
        assert!(sign_report(&w).is_err());
        let w = CoefficientWindow::from_signs(1, vec![1, 1, 1]);
        let r = sign_report(&w).unwrap();
        assert_eq!((r.x, r.chowla_sum, r.sign_changes), (3, 2, 0));
    }
}
