//! The fractional Poisson process computed three independent ways: the
//! analytic series, an infinite linear ODE system in transformed time
//! `τ = t^β`, and Monte Carlo renewal simulation, plus the exact
//! binomial-transform machinery linking them and the coagulation-
//! fragmentation form of the ODE system.

#![allow(
    clippy::excessive_precision,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop
)]

pub mod analytic;
pub mod cluster;
pub mod error;
mod hp;
pub mod mc;
pub mod odegen;
pub mod pascal;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub use specfun::ProcessParams;
