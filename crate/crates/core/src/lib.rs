//! Finite-scale spectral analysis of diagonal matrix sequences.
//!
//! The crate makes asymptotic statements about matrix sequences checkable at
//! desk scale: singular-value splits and the rank-plus-norm functional,
//! empirical eigenvalue distributions against symbol functions, piecewise
//! convergence of diagonal interpolants, decreasing rearrangements, and the
//! constructive permutation that sorts a diagonal sequence into one whose
//! interpolants converge to its symbol.

pub mod acs;
pub mod config;
pub mod distribution;
pub mod error;
pub mod glt;
pub mod linalg;
pub mod piecewise;
pub mod report;
pub mod sequences;
pub mod symbols;

pub use config::{non_increasing, RunConfig, Schedule, Verdict};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use sequences::{DiagonalSequence, Interpolant, MatrixSequence, SplitMix64};
pub use symbols::{Symbol, TestFunction};

pub use num_complex::Complex64;
