//! Diagonal physical design through sign-fixed convex restrictions.
//!
//! A design problem couples two field blocks through a diagonal of bounded
//! design parameters, `u = diag(theta) v` with `theta_min <= theta <= theta_max`.
//! Writing `theta` around its midpoint turns the coupling into an
//! absolute-upper-bound constraint `|w| <= |v|`, which becomes convex once the
//! signs of `v` are fixed. This crate provides:
//!
//! - [`model`]: problem data, the reformulation and design recovery,
//! - [`conic`]: lowering of a sign-fixed problem to a cone program and two
//!   self-contained cone solvers (interior point and operator splitting),
//! - [`descent`]: sign flip descent with the greedy and field-based rules,
//! - [`oracle`]: brute-force global solvers for small instances,
//! - [`problems`]: builders for Helmholtz, static diffusion and dynamic
//!   diffusion control design.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod clock;
pub mod conic;
pub mod descent;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod problems;

pub use clock::{Clock, NoClock};
pub use error::{Error, Result};
