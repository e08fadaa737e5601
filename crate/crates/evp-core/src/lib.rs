//! Numerical toolkit for random walks in quasi-periodic environments on the
//! circle: the walk `T f(x) = p(x) f(x+alpha) + q(x) f(x-alpha)` driven by an
//! irrational rotation, its invariant densities, Poisson/cohomological
//! equation solvers, exact lattice evolution, mixing-rate measurement, and the
//! distribution theory of geometric holding-time sums.
//!
//! The crate is `no_std`-compatible (with `alloc`); all IO, file formats and
//! the CLI live in the companion crate `evp-lab`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod arithmetic;
pub mod cohomology;
pub mod environment;
mod error;
mod fft;
pub mod geomsum;
pub mod liouville;
pub mod math;
pub mod periodic;
pub mod poisson;
pub mod walk;

pub use error::{Error, Result};
