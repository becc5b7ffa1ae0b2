use crate::dirac_core::SignatureMatrix;
use crate::linalg;
use crate::{CMatrix, Error, Result};

/// Principal-angle threshold used for subspace equality.
pub const SUBSPACE_ANGLE_TOL: f64 = 1e-8;

/// A subspace `θ ⊂ Cⁿ` stored through an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySubspace {
    basis: CMatrix,
}

impl BoundarySubspace {
    /// Orthonormalizes the column span of `spanning`; columns below
    /// `rel_tol · σ_max` are dropped.
    pub fn span(spanning: &CMatrix, rel_tol: f64) -> Self {
        Self {
            basis: linalg::orth(spanning, rel_tol),
        }
    }

    /// Wraps a basis that is already orthonormal (checked to 1e-12).
    pub fn from_orthonormal(basis: CMatrix) -> Result<Self> {
        let k = basis.ncols();
        let defect = (basis.adjoint() * &basis - CMatrix::identity(k, k)).norm();
        if defect > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "basis is not orthonormal (‖B*B - I‖ = {defect:.3e})"
            )));
        }
        Ok(Self { basis })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            basis: CMatrix::zeros(n, 0),
        }
    }

    pub fn whole(n: usize) -> Self {
        Self {
            basis: CMatrix::identity(n, n),
        }
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Largest principal angle to `other`; `π/2` for different dimensions.
    pub fn angle_to(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() || self.ambient() != other.ambient() {
            return std::f64::consts::FRAC_PI_2;
        }
        linalg::max_principal_angle(&self.basis, &other.basis)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.angle_to(other) < SUBSPACE_ANGLE_TOL
    }
}

/// `θ^× = Cⁿ ⊖ Jθ`.
pub fn theta_cross(theta: &BoundarySubspace, j: &SignatureMatrix) -> Result<BoundarySubspace> {
    if theta.ambient() != j.dim() {
        return Err(Error::Dimension(format!(
            "θ lives in C^{} but J is {}x{}",
            theta.ambient(),
            j.dim(),
            j.dim()
        )));
    }
    // J is unitary, so Jθ keeps an orthonormal basis
    let image = j.matrix() * theta.basis();
    Ok(BoundarySubspace {
        basis: linalg::complement(&image),
    })
}
