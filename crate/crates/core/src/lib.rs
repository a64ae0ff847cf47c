//! Entanglement dynamics of two harmonic oscillators, each coupled to its
//! own bosonic reservoir, beyond the secular and Markovian approximations.
//!
//! The layers, bottom up: complex special functions ([`specfun`]),
//! reservoir spectra ([`spectral`]), time-dependent master-equation
//! coefficients and their memory integrals ([`coeffs`]), Gaussian state
//! propagation and entanglement of formation ([`gaussian`]), and
//! trajectories with regime classification ([`dynamics`]).
//!
//! Units: `ħ = k_B = ω_c = 1`; time is `τ = ω_c t`.

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coeffs;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod quad;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
