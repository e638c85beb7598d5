//! Exact steady states of two all-to-all driven-dissipative spin models on
//! the Dicke manifold, their spectral decompositions, the closed-form
//! finite-size predictions for every observable, and a batch experiment
//! runner that cross-validates the two.
//!
//! The two models are
//!
//! * squeezed decay: a single collective jump operator `S_x - i zeta S_y`,
//!   with a pure dark steady state for even N and an exactly known mixed
//!   state for odd N;
//! * driven superradiance: resonant drive plus collective decay, with jump
//!   operator `S^- + i N Upsilon / 2`.
//!
//! Both steady states are inverse Gram matrices of those jump operators,
//! which this crate factorizes exactly (exploiting their banded structure)
//! up to N ~ 1e4.

// index-heavy numeric kernels; NaN-rejecting range checks are deliberate
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::manual_is_multiple_of)]

pub mod analytic;
pub mod dicke;
pub mod error;
pub mod linalg;
pub mod quad;
pub mod special;
pub mod spectral;
pub mod steady;
pub mod sweep;

pub use error::{Error, Result};
