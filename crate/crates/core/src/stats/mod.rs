//! Sign statistics and the short-interval, moment and convolution experiments.

mod convolution;
mod cor;
mod primes;
mod scan;
mod signs;

pub use convolution::{shifted_convolution, ShiftParams, ShiftedConvolution};
pub use cor::{cor_proof_check, CorProofReport, CorStatus, MAX_TWO_POWER};
pub use primes::{
    minorant_lhs, minorant_rhs, prime_moment_checks, satotate_histogram, semicircle_cdf, serre_cm_density, PairCheck,
    PrimeMomentReport, SatoTateHistogram, SerreDensity, POLY_GRID,
};
pub use scan::{
    interval_scan, moment_report, variance_short, IntervalScanReport, MomentReport, ScanOptions, VarianceReport,
};
pub use signs::{
    chowla_correlation, sign_changes, sign_changes_brute, sign_counts, sign_report, SignCounts, SignReport,
};
