//! Spectral asymptotics of radial kernel matrices in the flat limit.
//!
//! Scale a radial kernel as K_eps(x, y) = f(eps * ||x - y||) and let the
//! scale eps shrink to zero. The kernel matrix on a fixed point set collapses
//! toward the rank-one all-ones matrix, yet its spectrum degenerates in a
//! completely structured way: eigenvalues split into groups traveling at even
//! powers of eps (plus one group at an odd power when the kernel has a
//! non-smooth radial profile), with computable leading coefficients, and the
//! eigenvectors converge to bases assembled from a QR factorization of a
//! Vandermonde matrix. This crate computes those predictions exactly, and
//! verifies them against brute-force spectra on a grid of eps values.
//!
//! The pieces:
//!
//! * [`multiindex`]: graded enumeration of exponent tuples; every block
//!   structure in the crate derives from this one ordering.
//! * [`kernels`]: kernel families, their Taylor data at zero, smoothness
//!   order detection, and Wronskian-type derivative matrices.
//! * [`matrices`]: point sets, Vandermonde matrices, entrywise powers of the
//!   distance matrix, and scaled kernel matrices.
//! * [`linalg`]: the dense kernel of the crate. Householder QR with a fixed
//!   sign convention, a cyclic Jacobi eigensolver, sign/log determinants,
//!   elementary symmetric polynomials, and the two perturbation lemmas
//!   (bordered saddle determinants and leading ESP coefficients).
//! * [`flatlimit`]: the predictions. Determinant expansion order and leading
//!   coefficient, eigenvalue groups with main terms, limiting eigenvector
//!   bases, and hypothesis checks.
//! * [`harness`]: empirical spectra on an eps grid, log-log slope fits,
//!   Richardson extrapolation, subspace angles, and CSV/JSON reporting.

pub mod error;
pub mod flatlimit;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod matrices;
pub mod multiindex;

pub use error::{Error, Result};

/// Matrix types used throughout the public API.
pub use nalgebra;

// Every code listing in the book compiles and runs against the current
// crate: each chapter becomes a rustdoc module here, so `cargo test --doc`
// executes its snippets and a failure names the chapter that broke.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/multi-indices.md")]
    mod multi_indices {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/matrices.md")]
    mod matrices {}
    #[doc = include_str!("../../../book/src/linalg.md")]
    mod linalg {}
    #[doc = include_str!("../../../book/src/predictions.md")]
    mod predictions {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
