//! Minimal positive solutions of `−(w|u′|^{p−2}u′)′ = σ u^q` on `(−1, 1)`
//! with zero boundary values, for nonnegative Radon data `σ`.
//!
//! The one-dimensional structure makes the `(p, w)`-potential of a finite
//! measure explicit up to a single flux constant; everything else (infinite
//! measures, energies, the sublinear iteration, trace brackets) is built on
//! top of that solver.

// `!(a <= b)` is used on purpose so that NaN lands on the rejecting side
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod limits;
pub mod measures;
pub mod mesh;
pub mod params;
pub mod quad;
pub mod solver;
pub mod sublinear;
pub mod trace;
pub mod weights;
pub mod wolff;

pub use error::{Error, Result};
pub use geometry::{Point, Side};
pub use measures::{Atom, DensityPart, RadonMeasure};
pub use params::{Gamma, ProblemParams, SharpConstants};
pub use weights::{Weight, WeightFamily};
