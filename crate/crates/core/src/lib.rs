//! Mean-square simulation of the iterated Stratonovich integrals that appear in
//! strong Taylor–Stratonovich schemes of orders 1.0 to 2.5 for Itô SDEs with
//! multidimensional non-commutative noise.
//!
//! The integrals are expanded in multiple Fourier–Legendre series. The layout
//! follows the data flow of one simulation step:
//!
//! - [`legendre`]: exact Legendre polynomials and the shifted orthonormal basis.
//! - [`coeffs`]: exact expansion coefficients, scaling to a step size, tables.
//! - [`noise`]: keyed Gaussian streams for the basis projections of the noise.
//! - [`kernels`]: truncated expansions of single to quintuple integrals.
//! - [`mserror`]: closed-form and bounded mean-square errors, truncation choice.
//! - [`scheme`]: differential operators and the explicit one-step schemes.
//! - [`harness`]: Monte-Carlo convergence and error-formula experiments.

pub mod coeffs;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod legendre;
pub mod mserror;
pub mod noise;
pub mod scheme;
pub mod sum;

pub use error::{Error, Result};
