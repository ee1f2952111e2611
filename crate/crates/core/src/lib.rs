//! Moment generating functions and mean/variance expansions of linear
//! eigenvalue statistics for the Gaussian and Laguerre β-ensembles
//! (β = 1, 2, 4), with brute-force and Monte Carlo cross-checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asympt;
pub mod error;
pub mod ensembles;
pub mod gauss;
pub mod mcsample;
pub mod operator;
pub mod orthopoly;
pub mod specfun;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `x` with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}
