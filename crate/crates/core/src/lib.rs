//! Numerical toolkit for singularities of inverse branches of entire functions.
//!
//! * [`fnmodel`]: the target functions, including an overflow-safe log-domain
//!   evaluator for the lacunary example `exp(sum (z/2^k)^(2^k))`.
//! * [`lifting`]: continuation of inverse branches along curves, winding
//!   numbers, line sweeps and good-curve probes.
//! * [`components`]: grid tracking of sublevel components, component ladders
//!   and their classification.
//! * [`paperexample`]: the binary tree of the lacunary example, its
//!   inequality/derivative/arc checks and the SVG figure.
//! * [`poisson`]: Poisson integrals of singular measures.
//! * [`cli`]: configuration and command dispatch for the `invbranch` binary.

pub mod error;
pub mod components;
pub mod fnmodel;
pub mod lifting;
pub mod paperexample;
pub mod poisson;
pub mod cli;

pub use error::{Error, Result};
pub use num_complex::Complex64;
