//! Recovery of overcomplete symmetric third-order tensor decompositions.
//!
//! A symmetric tensor `T = sum_i a_i^{x3}` with more components than its
//! dimension cannot be split with simultaneous diagonalisation. This crate
//! lifts `T` to a sixth-order object whose top eigenspace is close to
//! `span{a_i^{x3}}`, projects it onto a spectral-norm ball in two
//! rectangular flattenings, and extracts components one Gaussian contraction
//! at a time. The lifted operator is never materialised: it is applied to
//! blocks of vectors through a sequence of dense contractions costing
//! `O(d^6)` per vector.
//!
//! Entry points:
//! - [`recovery::decompose`] runs the full pipeline.
//! - [`harness`] holds instance generation, scoring, diagnostics, the
//!   Jennrich baseline and the benchmark grid.
//! - [`io`] reads and writes the binary tensor and component files.

pub mod error;
pub mod harness;
pub mod io;
pub mod lifting;
pub mod netcontract;
pub mod recovery;
pub mod report;
pub mod rounding;
pub mod seed;
pub mod tensor;
pub mod truncation;

pub use error::{Error, Result};
pub use tensor::{ComponentSet, Tensor3};
