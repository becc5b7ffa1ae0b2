//! Dirac-type expressions `J y' + Q(x) y`: signature matrices, potentials,
//! symmetry classification, propagation and quadrature residuals.

mod classify;
mod expression;
mod potential;
mod propagate;
mod quadrature;
mod signature;

pub use classify::{classify, strip_bounds, Regime, SymmetryReport};
pub use expression::{DiracExpression, DiracSystem, Interval};
pub use potential::{Interpolation, PotentialSpec, SampledPotential};
pub use propagate::{propagate, propagate_from, FundamentalSolution};
pub use quadrature::{
    l2_tail_norm, lagrange_residual, simpson, simpson_matrix, simpson_with_error, LagrangeBalance,
    Quadrature, Trajectory,
};
pub use signature::{flip, flip_conjugate, kappa, SignatureForm, SignatureMatrix};
