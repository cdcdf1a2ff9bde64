pub mod arith;
pub mod cli;
pub mod coeffs;
mod dd;
pub mod error;
pub mod multeval;
pub mod ntt;
pub mod sieveweights;
pub mod stats;

pub use error::{Error, Result};
