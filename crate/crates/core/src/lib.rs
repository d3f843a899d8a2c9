//! Classical, quantum and restricted-entanglement bounds of the Bell
//! functionals that arise when a Boolean function is computed by
//! non-adaptive measurements with XOR side-processing, plus a Monte Carlo
//! simulator of the protocol.
//!
//! The crate is `no_std` (it needs `alloc`); file formats and the CLI live in
//! the `nmqc` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod boolfn;
pub mod classical;
mod error;
pub mod optimize;
pub mod protocol;
pub mod quantum;
pub mod simkit;

pub use error::{Error, Result};

/// Exact rational with arbitrary-precision numerator and denominator.
pub type Rational = num_rational::BigRational;

/// Nearest `f64` to an exact rational.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
