//! Weighted RV coefficient analysis under invariant orthogonal integration.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! (weights, squared-Euclidean dissimilarities)
//!     --geometry-->  standard kernel K  (symmetric, PSD, K sqrt(f) = 0)
//!     --spectra--->  nontrivial spectrum and its moments
//!     --rvstats--->  RV coefficient, exact null moments/cumulants,
//!                    skewness/kurtosis-corrected significance test
//! ```
//!
//! plus two independent verification engines:
//!
//! * [`weingarten`] — exact combinatorial route: pair partitions, join and
//!   coset types, orthogonal Weingarten functions and the centered-moment
//!   assembly, all in arbitrary-precision rational arithmetic;
//! * [`haaroracle`] — Monte Carlo route: Haar-distributed orthogonal
//!   matrices, rotated cross-inertia samples, empirical overlap matrices
//!   and a permutation baseline.

pub mod error;
pub mod geometry;
pub mod haaroracle;
pub mod rvstats;
pub mod spectra;
pub mod weingarten;

pub use error::{Error, Result};
