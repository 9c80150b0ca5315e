//! Eigenvalue-gap certification for block-structured representations of
//! free groups, and polytope approximations of their deformation domains.
//!
//! The crate is organised around a pipeline:
//!
//! * [`words`]: exact combinatorics of free groups (reduced words,
//!   translation length, conjugacy-class enumeration, abelianization).
//! * [`spectra`]: dense spectral kernel (eigenvalue magnitudes,
//!   logarithmic gaps, attracting/repelling subspaces and flags).
//! * [`blocks`]: block-structure algebra (decompositions, block
//!   diagonalization, normalization and the `(s, x, B)` parameterization
//!   of block diagonal matrices).
//! * [`configs`]: large eigenvalue configurations, admissibility and the
//!   configuration-based gap formula.
//! * [`certify`]: empirical certification of the gap-growth condition
//!   over enumerated conjugacy classes.
//! * [`domain`]: half-space models of the deformation domain, with LP
//!   based feasibility, redundancy and volume queries.
//!
//! With the default `parallel` feature the per-class work (gap series,
//! constraint generation, Monte Carlo volume) runs on rayon; without it a
//! sequential fallback with identical output is used.

pub mod blocks;
pub mod certify;
pub mod configs;
pub mod domain;
mod error;
pub(crate) mod exec;
pub mod scalar;
pub mod spectra;
pub mod words;

pub use error::{Error, Result};
