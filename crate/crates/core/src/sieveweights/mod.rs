//! Brun upper-bound sieve weights and the mollified weights w, w′, w″.

mod dplus;
mod params;
mod rho;
mod weights;

pub use dplus::{enumerate_dplus, in_dplus, DPLUS_Y_LIMIT};
pub use params::{default_gamma, ym_schedule, SieveParams, DEFAULT_DELTA};
pub use rho::rho_plus_window;
pub use weights::{
    weights_window, wpp_majorant, Majorant, WeightWindow, MAJORANT_WINDOW_LIMIT,
};

pub(crate) use weights::weights_for;
