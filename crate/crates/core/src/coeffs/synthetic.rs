use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{FormKind, PrimeEigenvalueTable};
use crate::arith::primes_up_to;
use crate::error::{Error, Result};

// separates the keep/zero draws from the eigenvalue draws under one seed
const SCHEDULE_SALT: u64 = 0x5bd1_e995_9e37_79b9;

/// Independent stream per prime so tables agree on their common range.
fn prime_stream(seed: u64, p: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(p);
    rng
}

/// 2cos θ with θ from (2/π) sin²θ dθ: twice the abscissa of a uniform point in the unit disk.
fn semicircle(rng: &mut impl Rng) -> f64 {
    loop {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        if x * x + y * y < 1.0 {
            return 2.0 * x;
        }
    }
}

pub fn satotate_sample(seed: u64, limit: u64) -> Result<PrimeEigenvalueTable> {
    if limit < 2 {
        return Err(Error::param("prime bound must be at least 2"));
    }
    let primes = primes_up_to(limit);
    let lambdas = primes
        .iter()
        .map(|&p| semicircle(&mut prime_stream(seed, p)))
        .collect();
    PrimeEigenvalueTable::from_parts(
        FormKind::SatoTateSynthetic,
        0,
        limit,
        primes,
        lambdas,
        None,
        format!("semicircle sample, chacha20 seed {seed}"),
    )
}

/// g(p) = 1 for every prime.
pub fn unit_table(limit: u64) -> Result<PrimeEigenvalueTable> {
    let primes = primes_up_to(limit);
    let lambdas = vec![1.0; primes.len()];
    PrimeEigenvalueTable::from_parts(FormKind::Unit, 0, limit, primes, lambdas, None, "constant 1")
}

/// Which primes a vanishing model zeroes.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySchedule {
    None,
    All,
    ResidueClass { modulus: u64, residue: u64 },
    /// Each prime independently with probability `density`.
    Random { density: f64, seed: u64 },
}

impl DensitySchedule {
    pub fn selects(&self, p: u64) -> bool {
        match *self {
            DensitySchedule::None => false,
            DensitySchedule::All => true,
            DensitySchedule::ResidueClass { modulus, residue } => p % modulus == residue,
            DensitySchedule::Random { density, seed } => {
                prime_stream(seed ^ SCHEDULE_SALT, p).random::<f64>() < density
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            DensitySchedule::None => "none".into(),
            DensitySchedule::All => "all primes".into(),
            DensitySchedule::ResidueClass { modulus, residue } => {
                format!("p = {residue} mod {modulus}")
            }
            DensitySchedule::Random { density, seed } => {
                format!("density {density}, seed {seed}")
            }
        }
    }
}

pub fn vanishing_model(base: &PrimeEigenvalueTable, schedule: &DensitySchedule) -> PrimeEigenvalueTable {
    let mut out = base.clone();
    if *schedule == DensitySchedule::None {
        return out;
    }
    out.zero_where(|p| schedule.selects(p));
    if out.kind == FormKind::SatoTateSynthetic {
        out.kind = FormKind::VanishingModel;
    }
    out.source = format!("{}; zeroed on {}", base.source, schedule.describe());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_bounded() {
        let a = satotate_sample(7, 50_000).unwrap();
        let b = satotate_sample(7, 50_000).unwrap();
        assert_eq!(a, b);
        assert!(a.lambdas().iter().all(|l| l.abs() <= 2.0));
        let c = satotate_sample(8, 50_000).unwrap();
        assert_ne!(a.lambdas(), c.lambdas());
        // prefix stability
        let short = satotate_sample(7, 1000).unwrap();
        assert_eq!(short.lambdas(), &a.lambdas()[..short.len()]);
    }

    #[test]
    fn negative_fraction_near_half() {
        let t = satotate_sample(1, 100_000).unwrap();
        let neg = t.lambdas().iter().filter(|&&l| l < 0.0).count() as f64 / t.len() as f64;
        assert!((neg - 0.5).abs() <= 0.01, "{neg}");
    }

    #[test]
    fn schedules() {
        let base = satotate_sample(3, 10_000).unwrap();
        assert_eq!(vanishing_model(&base, &DensitySchedule::None), base);
        let all = vanishing_model(&base, &DensitySchedule::All);
        assert!(all.lambdas().iter().all(|&l| l == 0.0));
        let mod4 = vanishing_model(&base, &DensitySchedule::ResidueClass { modulus: 4, residue: 3 });
        for e in mod4.entries() {
            assert_eq!(e.lambda == 0.0, e.p % 4 == 3);
        }
        let rnd = DensitySchedule::Random { density: 0.3, seed: 9 };
        let zeroed = vanishing_model(&base, &rnd);
        let frac = zeroed.lambdas().iter().filter(|&&l| l == 0.0).count() as f64 / base.len() as f64;
        assert!((frac - 0.3).abs() < 0.03, "{frac}");
        assert_eq!(zeroed, vanishing_model(&base, &rnd));
    }
}
