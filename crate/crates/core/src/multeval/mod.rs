//! Multiplicative extension of prime data and mean values.

mod mean;
mod spec;
mod spf;
mod window;

pub use mean::{density_nonzero, euler_product_m, halasz_bound, EulerProduct, NonzeroDensity};
pub use spec::{hecke_power, sign_of, MultiplicativeSpec};
pub use spf::spf_table;
pub use window::{evaluate_window, CoefficientWindow};
