//! Boundary data for `n = 2p` systems: subspaces `θ` and `θ^×`, admissible
//! pairs `(C₁, C₂)`, completions `Y* J X = J`, Φ-rotations and the maps `Γ`.

mod completion;
mod frame;
mod pair;
mod subspace;

pub use completion::{complete_pair, gamma_maps, gamma_matrix, BoundarySide, Completion};
pub use frame::canonical_frame;
pub use pair::{pair_from_theta, theta_from_pair, AdmissiblePair, PhiParameter};
pub use subspace::{theta_cross, BoundarySubspace, SUBSPACE_ANGLE_TOL};
