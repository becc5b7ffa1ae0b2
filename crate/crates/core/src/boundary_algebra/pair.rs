use super::subspace::BoundarySubspace;
use crate::linalg;
use crate::{CMatrix, Error, Result};

/// Row block `(C₁ C₂)` of a boundary condition `C₁y₁(0) + C₂y₂(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissiblePair {
    c1: CMatrix,
    c2: CMatrix,
}

impl AdmissiblePair {
    /// Accepts `(C₁, C₂)` when `rank [C₁ C₂] = p` at `rank_threshold · σ_max`.
    pub fn new(c1: CMatrix, c2: CMatrix, rank_threshold: f64) -> Result<Self> {
        let p = c1.nrows();
        if c1.shape() != (p, p) || c2.shape() != (p, p) || p == 0 {
            return Err(Error::Dimension(format!(
                "C₁ and C₂ must both be p x p, got {:?} and {:?}",
                c1.shape(),
                c2.shape()
            )));
        }
        let rank = linalg::rank(&linalg::hstack(&c1, &c2), rank_threshold);
        if rank != p {
            return Err(Error::NotAdmissible { rank, p });
        }
        Ok(Self { c1, c2 })
    }

    pub fn p(&self) -> usize {
        self.c1.nrows()
    }

    pub fn c1(&self) -> &CMatrix {
        &self.c1
    }

    pub fn c2(&self) -> &CMatrix {
        &self.c2
    }

    /// `[C₁ C₂]` as a `p x 2p` matrix.
    pub fn row(&self) -> CMatrix {
        linalg::hstack(&self.c1, &self.c2)
    }
}

/// `θ = ker [C₁ C₂] ⊂ C^{2p}`.
pub fn theta_from_pair(pair: &AdmissiblePair) -> BoundarySubspace {
    let kernel = linalg::null_space(&pair.row(), 1e-10);
    BoundarySubspace::from_orthonormal(kernel).expect("null_space returns an orthonormal basis")
}

/// A pair whose kernel is `θ`; needs `dim θ = p` inside `C^{2p}`.
pub fn pair_from_theta(theta: &BoundarySubspace, rank_threshold: f64) -> Result<AdmissiblePair> {
    let n = theta.ambient();
    if !n.is_multiple_of(2) || theta.dim() != n / 2 {
        return Err(Error::Dimension(format!(
            "a boundary pair needs dim θ = n/2, got dim θ = {} in C^{n}",
            theta.dim()
        )));
    }
    let p = n / 2;
    let rows = linalg::complement(theta.basis()).adjoint();
    AdmissiblePair::new(
        rows.columns(0, p).into_owned(),
        rows.columns(p, p).into_owned(),
        rank_threshold,
    )
}

/// Hermitian `Φ` parametrizing the rotation pair `(cos Φ, sin Φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiParameter {
    phi: CMatrix,
}

impl PhiParameter {
    pub fn new(phi: CMatrix) -> Result<Self> {
        if !phi.is_square() || phi.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "Φ must be square, got {:?}",
                phi.shape()
            )));
        }
        let skew = (&phi - phi.adjoint()).norm();
        if skew >= 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "Φ is not Hermitian (‖Φ - Φ*‖ = {skew:.3e})"
            )));
        }
        Ok(Self {
            phi: linalg::hermitian_part(&phi),
        })
    }

    /// `Φ = φ·I_p`.
    pub fn scalar(p: usize, phi: f64) -> Self {
        Self {
            phi: CMatrix::identity(p, p) * linalg::re(phi),
        }
    }

    pub fn p(&self) -> usize {
        self.phi.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.phi
    }

    pub fn cos(&self) -> CMatrix {
        linalg::hermitian_function(&self.phi, f64::cos)
    }

    pub fn sin(&self) -> CMatrix {
        linalg::hermitian_function(&self.phi, f64::sin)
    }

    pub fn pair(&self) -> AdmissiblePair {
        // cos²Φ + sin²Φ = I, so the row block always has full rank
        AdmissiblePair {
            c1: self.cos(),
            c2: self.sin(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity};

    #[test]
    fn identity_pair_gives_second_component() {
        let pair = AdmissiblePair::new(identity(2), CMatrix::zeros(2, 2), 1e-10).unwrap();
        let theta = theta_from_pair(&pair);
        let expected = BoundarySubspace::from_orthonormal(CMatrix::from_fn(4, 2, |i, j| {
            if i == j + 2 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        }))
        .unwrap();
        assert!(theta.same_as(&expected));
        let zero_phi = PhiParameter::scalar(2, 0.0).pair();
        assert!(theta_from_pair(&zero_phi).same_as(&expected));
    }

    #[test]
    fn rank_deficient_pair_reports_rank() {
        let ones = CMatrix::from_element(2, 2, c(1.0, 0.0));
        let err = AdmissiblePair::new(ones.clone(), ones, 1e-10).unwrap_err();
        assert_eq!(err, Error::NotAdmissible { rank: 1, p: 2 });
    }

    #[test]
    fn non_hermitian_phi_is_rejected() {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(PhiParameter::new(m).is_err());
    }
}
