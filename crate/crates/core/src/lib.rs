//! Tilted non-Hermitian tight-binding lattices.
//!
//! The crate builds open-boundary truncations of tilted chains and their
//! particle-pair square lattices, diagonalizes them, finds the equally
//! spaced (possibly complex) Wannier-Stark ladders, certifies the symmetry
//! and ladder-operator identities as matrix statements, and propagates
//! single-particle and pair states to reproduce damped, growing and
//! standard Bloch oscillations.

// `!(x < bound)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lattice;
pub mod dynamics;
pub mod experiments;
pub mod pairmap;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
