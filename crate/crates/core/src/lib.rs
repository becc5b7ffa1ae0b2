//! Numerical toolkit for Dirac-type systems `J y' + Q(x) y = λ y` with
//! non-selfadjoint matrix potentials.
//!
//! The crate computes fundamental solutions, Weyl solutions and Weyl
//! functions on the half-line, boundary-triple data for admissible boundary
//! pairs, and defect counts (dimensions of L² solution spaces). Finite-interval
//! surrogates check the dimension bookkeeping of dual pairs where everything
//! is exactly computable.
//!
//! Module map:
//! - [`dirac_core`]: signature matrices, potentials, symmetry classification,
//!   propagation of the fundamental matrix and quadrature residuals.
//! - [`boundary_algebra`]: subspaces `θ`, `θ^×`, admissible pairs,
//!   completions `Y* J X = J`, Φ-rotations and boundary maps `Γ`.
//! - [`weyl_engine`]: Weyl solutions by truncation, Weyl functions, the
//!   Herglotz-type identities and the Cayley (Schur) transform.
//! - [`defect_lab`]: L² solution counts and finite-interval dimension checks.
//! - [`cli`]: scenario configs, batch pipelines and report writers.

// `!(x < t)` is the house style for thresholds: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary_algebra;
pub mod cli;
pub mod defect_lab;
pub mod dirac_core;
pub mod error;
pub mod linalg;
pub mod ode;
pub mod tolerances;
pub mod weyl_engine;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use error::{Error, Result};
pub use tolerances::Tolerances;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
