//! Exact quantum dynamics of a harmonic oscillator bilinearly coupled to a
//! bath of harmonic oscillators.
//!
//! Everything is built on the symmetric coupling matrix `B` and its
//! normal-mode decomposition `B = X diag(z^2) X^T`:
//!
//! - [`model`]: the model, its spectrum and Langevin-level quantities.
//! - [`matfun`]: `F = sin(sqrt(B) t)/sqrt(B)` and friends, real and imaginary time.
//! - [`propagator`]: the closed-form propagator, undriven and driven.
//! - [`gaussian`]: Gaussian integrals and phase-space moment evolution.
//! - [`reduced`]: the main oscillator's reduced state and reduced kernel.
//! - [`equilibrium`]: partition function and the thermal reduced state.
//! - [`correlators`]: time-ordered position matrix elements.
//! - [`oracle`]: independent brute-force checks.
//! - [`cli`]: the `oscbath` command-line front end.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod correlators;
pub mod equilibrium;
pub mod error;
pub mod gaussian;
pub mod matfun;
pub mod model;
pub mod oracle;
pub mod propagator;
pub mod quadrature;
pub mod reduced;

pub use error::{Error, Result};
pub use model::{BathMode, Model, ModelSpec, Spectrum};
