//! Exact and Monte Carlo tools for the square-discriminant problem of random
//! monic integer polynomials.
//!
//! The crate is `no_std` and needs only `alloc`. Everything here is pure
//! computation: arithmetic in `F_p[T]`, additive characters on the torus
//! `F_p((1/T))/F_p[T]`, Fourier analysis on grids of monic tuples, pushforward
//! measures of coefficient laws, Möbius expectations, discriminant
//! probabilities, analytic helpers, and a sound cycle-type certifier for
//! `Gal(f) = S_n`. File formats, caching, the CLI and thread pools live in the
//! `boxgal` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails domain checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bounds;
pub mod discprob;
mod error;
pub mod ffpoly;
pub mod fourier;
pub mod galois_mc;
pub mod math;
pub mod measures;
pub mod moebius_stats;
pub mod torus;

pub use error::{Error, Result};

/// Default ceiling on the number of grid points any exhaustive scan may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;
