use serde::Serialize;

use crate::error::Result;
use crate::multeval::{evaluate_window, sign_of, MultiplicativeSpec};

/// Largest exponent tried when searching for g(2^b) = 1.
pub const MAX_TWO_POWER: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorStatus {
    Verified,
    /// Some g(2^j) vanishes before b; the claim holds trivially.
    TrivialBranch,
    /// No even b with g(2^b) = 1 up to MAX_TWO_POWER.
    NotFound,
    /// The residue class check found a counterexample.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorProofReport {
    #[serde(rename = "X")]
    pub x: u64,
    pub g2: i8,
    pub b: Option<u32>,
    pub j: Option<u32>,
    pub status: CorStatus,
    /// n <= X in the class 2^j − 1 mod 2^(j+1).
    pub checked: u64,
    pub multiplicativity_failures: u64,
    pub disjunction_failures: u64,
}

/// Runs the consecutive-sign construction for g = sgn λ on n <= X.
pub fn cor_proof_check(spec: &MultiplicativeSpec, x: u64) -> Result<CorProofReport> {
    let thr = spec.zero_threshold();
    let g2 = sign_of(spec.value(2, 1)?, thr);
    let mut report = CorProofReport {
        x,
        g2,
        b: None,
        j: None,
        status: CorStatus::NotFound,
        checked: 0,
        multiplicativity_failures: 0,
        disjunction_failures: 0,
    };
    // g(2^e) for e = 0..
    let mut pow = vec![1i8];
    for e in 1..=MAX_TWO_POWER {
        let s = sign_of(spec.value(2, e)?, thr);
        pow.push(s);
        if s == 0 {
            report.status = CorStatus::TrivialBranch;
            return Ok(report);
        }
        if e % 2 == 0 && s == 1 {
            report.b = Some(e);
            break;
        }
    }
    let Some(b) = report.b else {
        return Ok(report);
    };
    // j >= 1 keeps n odd, so that g(2n) = g(2) g(n)
    let Some(j) = (1..b).find(|&j| pow[j as usize + 1] == g2 * pow[j as usize]) else {
        return Ok(report);
    };
    report.j = Some(j);

    let g = evaluate_window(spec, 1, 2 * x + 3)?;
    let modulus = 1u64 << (j + 1);
    let mut n = (1u64 << j) - 1;
    while n <= x {
        if n > 0 {
            report.checked += 1;
            let (gn, gn1) = (g.sign(n), g.sign(n + 1));
            let (g2n, g2n1, g2n2) = (g.sign(2 * n), g.sign(2 * n + 1), g.sign(2 * n + 2));
            if g2n != g2 * gn || g2n2 != g2 * gn1 {
                report.multiplicativity_failures += 1;
            }
            if gn * gn1 < 0 && g2n * g2n1 < 0 && g2n1 * g2n2 < 0 {
                report.disjunction_failures += 1;
            }
        }
        n += modulus;
    }
    report.status = if report.multiplicativity_failures + report.disjunction_failures == 0 {
        CorStatus::Verified
    } else {
        CorStatus::Failed
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{cm_prime_table, delta_prime_table};
    use std::sync::Arc;

    #[test]
    fn delta_construction() {
        let t = Arc::new(delta_prime_table(30_000).unwrap());
        let r = cor_proof_check(&MultiplicativeSpec::hecke_extend(t), 10_000).unwrap();
        assert_eq!(r.g2, -1);
        assert_eq!(r.status, CorStatus::Verified);
        assert!(r.checked > 0);
        let (b, j) = (r.b.unwrap(), r.j.unwrap());
        assert!(b % 2 == 0 && 1 <= j && j < b);
    }

    #[test]
    fn positive_two_and_vanishing_two() {
        let one = MultiplicativeSpec::constant_one();
        let r = cor_proof_check(&one, 1000).unwrap();
        assert_eq!((r.b, r.j, r.status), (Some(2), Some(1), CorStatus::Verified));
        assert_eq!(r.checked, 250);
        let cm = MultiplicativeSpec::hecke_extend(Arc::new(cm_prime_table(3000).unwrap()));
        assert_eq!(cor_proof_check(&cm, 1000).unwrap().status, CorStatus::TrivialBranch);
    }
}
