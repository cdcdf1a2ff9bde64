//! Normalized Hecke eigenvalues at primes.

mod cache;
mod cm;
mod delta;
mod synthetic;
mod tau;

pub use cache::{read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};
pub use cm::{cm_ap, cm_ap_fast, cm_prime_table};
pub use delta::{delta_prime_table, delta_prime_table_with, DeltaOptions, DELTA_SERIES_LIMIT};
pub use synthetic::{satotate_sample, unit_table, vanishing_model, DensitySchedule};
pub use tau::{tau_series, tau_series_with, TauPrecision, DEFAULT_FIXED_LIMIT, TAU_SERIES_LIMIT};

use num_bigint::{BigInt, Sign};
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::arith::isqrt_u128;
use crate::dd::Dd;

use crate::error::{Error, Result};

/// Zero threshold for tables whose values are not backed by exact integers.
pub const SYNTHETIC_ZERO_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FormKind {
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "cm")]
    CmCurve,
    #[serde(rename = "satotate")]
    SatoTateSynthetic,
    #[serde(rename = "vanishing")]
    VanishingModel,
    #[serde(rename = "unit")]
    /// The constant model g(p) = 1.
    Unit,
}

impl FormKind {
    pub const ALL: [FormKind; 5] = [
        FormKind::Delta,
        FormKind::CmCurve,
        FormKind::SatoTateSynthetic,
        FormKind::VanishingModel,
        FormKind::Unit,
    ];

    pub fn tag(self) -> u8 {
        match self {
            FormKind::Delta => 0,
            FormKind::CmCurve => 1,
            FormKind::SatoTateSynthetic => 2,
            FormKind::VanishingModel => 3,
            FormKind::Unit => 4,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        FormKind::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            FormKind::Delta => "delta",
            FormKind::CmCurve => "cm",
            FormKind::SatoTateSynthetic => "satotate",
            FormKind::VanishingModel => "vanishing",
            FormKind::Unit => "unit",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        FormKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Weight used when none is given.
    pub fn default_weight(self) -> u32 {
        match self {
            FormKind::Delta => 12,
            FormKind::CmCurve => 2,
            _ => 0,
        }
    }

    /// Primes where the local factor is not given by the Hecke recurrence.
    pub fn bad_primes(self) -> &'static [u64] {
        match self {
            FormKind::CmCurve => &[2],
            _ => &[],
        }
    }

    /// λ(p^ν) = λ(p)^ν at every prime.
    pub fn completely_multiplicative(self) -> bool {
        self == FormKind::Unit
    }
}

impl std::fmt::Display for FormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormSpec {
    pub kind: FormKind,
    pub weight: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub vanishing_density: f64,
}

impl FormSpec {
    pub fn new(kind: FormKind) -> Self {
        FormSpec {
            kind,
            weight: kind.default_weight(),
            seed: 0,
            vanishing_density: if kind == FormKind::VanishingModel { 0.5 } else { 0.0 },
        }
    }

    pub fn delta() -> Self {
        Self::new(FormKind::Delta)
    }

    pub fn cm() -> Self {
        Self::new(FormKind::CmCurve)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let want = self.kind.default_weight();
        if want != 0 && self.weight != want {
            return Err(Error::param(format!(
                "{} has weight {want}, got {}",
                self.kind, self.weight
            )));
        }
        if !(0.0..=1.0).contains(&self.vanishing_density) {
            return Err(Error::param(format!(
                "vanishing density {} not in [0, 1]",
                self.vanishing_density
            )));
        }
        Ok(())
    }

    /// Build the prime table up to `limit`.
    pub fn build_table(&self, limit: u64) -> Result<PrimeEigenvalueTable> {
        self.validate()?;
        match self.kind {
            FormKind::Delta => delta_prime_table(limit),
            FormKind::CmCurve => cm_prime_table(limit),
            FormKind::SatoTateSynthetic => satotate_sample(self.seed, limit),
            FormKind::VanishingModel => {
                let base = satotate_sample(self.seed, limit)?;
                let schedule = DensitySchedule::Random {
                    density: self.vanishing_density,
                    seed: self.seed,
                };
                Ok(vanishing_model(&base, &schedule))
            }
            FormKind::Unit => unit_table(limit),
        }
    }
}

/// One row of a [`PrimeEigenvalueTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeEntry<'a> {
    pub p: u64,
    pub lambda: f64,
    pub exact: Option<&'a BigInt>,
}

/// Normalized eigenvalues for every prime up to `limit`, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeEigenvalueTable {
    pub kind: FormKind,
    pub weight: u32,
    pub limit: u64,
    /// Zeros are decided on integers rather than floats.
    pub exact_provenance: bool,
    pub source: String,
    primes: Vec<u64>,
    lambdas: Vec<f64>,
    exact: Option<Vec<BigInt>>,
}

impl PrimeEigenvalueTable {
    pub fn from_parts(
        kind: FormKind,
        weight: u32,
        limit: u64,
        primes: Vec<u64>,
        lambdas: Vec<f64>,
        exact: Option<Vec<BigInt>>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if primes.len() != lambdas.len() || exact.as_ref().is_some_and(|e| e.len() != primes.len()) {
            return Err(Error::param("column lengths differ"));
        }
        Ok(PrimeEigenvalueTable {
            kind,
            weight,
            limit,
            exact_provenance: matches!(kind, FormKind::Delta | FormKind::CmCurve),
            source: source.into(),
            primes,
            lambdas,
            exact,
        })
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn exact_values(&self) -> Option<&[BigInt]> {
        self.exact.as_deref()
    }

    pub fn entry(&self, i: usize) -> PrimeEntry<'_> {
        PrimeEntry {
            p: self.primes[i],
            lambda: self.lambdas[i],
            exact: self.exact.as_ref().map(|e| &e[i]),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = PrimeEntry<'_>> + '_ {
        (0..self.len()).map(|i| self.entry(i))
    }

    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok()
    }

    /// λ(p), or an error when `p` is past the table.
    pub fn lambda(&self, p: u64) -> Result<f64> {
        if p > self.limit {
            return Err(Error::OutOfRange {
                value: p,
                limit: self.limit,
            });
        }
        self.index_of(p)
            .map(|i| self.lambdas[i])
            .ok_or_else(|| Error::param(format!("{p} is not prime")))
    }

    pub fn zero_threshold(&self) -> f64 {
        if self.exact_provenance {
            0.0
        } else {
            SYNTHETIC_ZERO_THRESHOLD
        }
    }

    pub fn is_zero_value(&self, lambda: f64) -> bool {
        if self.exact_provenance {
            lambda == 0.0
        } else {
            lambda.abs() < SYNTHETIC_ZERO_THRESHOLD
        }
    }

    /// Primes `p <= x` with λ(p) = 0.
    pub fn vanishing_primes(&self, x: u64) -> impl Iterator<Item = u64> + '_ {
        self.primes
            .iter()
            .zip(&self.lambdas)
            .take_while(move |(&p, _)| p <= x)
            .filter(|(_, &l)| self.is_zero_value(l))
            .map(|(&p, _)| p)
    }

    /// Replace λ(p) by zero on the selected primes.
    pub(crate) fn zero_where(&mut self, mut pick: impl FnMut(u64) -> bool) {
        for (i, &p) in self.primes.iter().enumerate() {
            if pick(p) {
                self.lambdas[i] = 0.0;
                if let Some(e) = self.exact.as_mut() {
                    e[i] = BigInt::from(0);
                }
            }
        }
    }

    /// Checks ordering, completeness and the Deligne bound.
    pub fn validate(&self) -> Result<()> {
        let expect = crate::arith::primes_up_to(self.limit);
        if expect != self.primes {
            return Err(Error::param("table does not list every prime up to its limit"));
        }
        if matches!(self.kind, FormKind::Delta | FormKind::CmCurve) {
            if let Some((p, l)) = self
                .primes
                .iter()
                .zip(&self.lambdas)
                .find(|(_, l)| l.abs() > 2.0)
            {
                return Err(Error::param(format!("|lambda({p})| = {} exceeds 2", l.abs())));
            }
        }
        Ok(())
    }
}

/// `a / p^((k-1)/2)` rounded from a 63-bit integer square root.
///
/// The result is within one unit in the last place of the true value.
pub fn normalize_exact(a: &BigInt, p: u64, weight: u32) -> f64 {
    if a.sign() == Sign::NoSign {
        return 0.0;
    }
    let num = a.abs().to_biguint().expect("nonnegative") .pow(2);
    let den = num_bigint::BigUint::from(p).pow(weight - 1);
    // q = num * 4^s / den with about 126 bits
    let diff = num.bits() as i64 - den.bits() as i64;
    let s = (126 - diff).div_euclid(2);
    let q = if s >= 0 {
        (num << (2 * s) as u64) / den
    } else {
        (num >> (-2 * s) as u64) / den
    };
    let q: u128 = q.try_into().expect("fits in 128 bits");
    let r = isqrt_u128(q) as f64;
    let v = r * 2f64.powi(-s as i32);
    if a.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// Same normalization from the mixed-radix digits of |a| (see [`Crt::signed_digits`]),
/// evaluated in double-double arithmetic.
///
/// [`Crt::signed_digits`]: crate::ntt::Crt::signed_digits
pub(crate) fn normalize_digits(digits: &[u64], moduli: &[u64], negative: bool, p: u64, weight: u32) -> f64 {
    let mut num = Dd::new(0.0);
    for (&d, &m) in digits.iter().zip(moduli).rev() {
        num = num.mul_f64(m as f64).add_f64(d as f64);
    }
    if num.hi == 0.0 {
        return 0.0;
    }
    // p^((k-1)/2) = p^((k-2)/2) √p for even k
    let pf = p as f64;
    let mut den = Dd::sqrt_f64(pf);
    for _ in 0..(weight - 2) / 2 {
        den = den.mul_f64(pf);
    }
    let v = num.div(den).to_f64();
    if negative {
        -v
    } else {
        v
    }
}
