//! Defect numbers: counts of L² solutions on the half-line, and the
//! dimension bookkeeping of dual pairs on finite intervals, where every
//! solution is square integrable and all quantities are exact ranks.

mod count;
mod finite;

pub use count::{count_l2, DefectReport};
pub use finite::{
    finite_interval_check, finite_interval_kernel, graph_orthogonality_probe, kernel_basis,
    quasi_selfadjoint_dims, von_neumann_dimension_check, Bump, FiniteIntervalCheck, KernelBasis,
    KernelDimension, QuasiDims, VonNeumannCheck,
};
