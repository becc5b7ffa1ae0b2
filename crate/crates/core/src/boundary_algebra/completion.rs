use serde::{Deserialize, Serialize};

use super::pair::{AdmissiblePair, PhiParameter};
use crate::dirac_core::{SignatureForm, SignatureMatrix};
use crate::linalg;
use crate::{CMatrix, CVector, Error, Result};

/// Operators `X = (C₁ C₂; C₃ C₄)` and `Y = (C₁′ C₂′; C₃′ C₄′)` with
/// `Y* Ĵ X = J`, where `Ĵ = (0 -I; I 0)` pairs the boundary values
/// `(Γ₀, Γ₁)`. For the canonical `J` this is `Y* J X = J`.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub x: CMatrix,
    pub y: CMatrix,
}

/// Which boundary map to apply: `B` uses the `X` blocks, `A` the `Y` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundarySide {
    B,
    A,
}

impl Completion {
    /// Checks `‖Y*ĴX - J‖ < 1e-10`.
    pub fn new(x: CMatrix, y: CMatrix, j: &SignatureMatrix) -> Result<Self> {
        let n = j.dim();
        if x.shape() != (n, n) || y.shape() != (n, n) || !n.is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "X and Y must be {n}x{n} with n even, got {:?} and {:?}",
                x.shape(),
                y.shape()
            )));
        }
        let comp = Self { x, y };
        let r = comp.residual(j);
        if !(r < 1e-10) {
            return Err(Error::InvalidArgument(format!("Y*ĴX - J has norm {r:.3e}")));
        }
        Ok(comp)
    }

    pub fn identity(p: usize) -> Self {
        Self {
            x: CMatrix::identity(2 * p, 2 * p),
            y: CMatrix::identity(2 * p, 2 * p),
        }
    }

    /// `X = Y = (cos Φ, sin Φ; -sin Φ, cos Φ)`.
    pub fn rotation(phi: &PhiParameter) -> Self {
        let (cos, sin) = (phi.cos(), phi.sin());
        let x = linalg::blocks(&cos, &sin, &(-&sin), &cos);
        Self { x: x.clone(), y: x }
    }

    pub fn p(&self) -> usize {
        self.x.nrows() / 2
    }

    /// `(C₁, C₂, C₃, C₄)`.
    pub fn x_blocks(&self) -> [CMatrix; 4] {
        split(&self.x)
    }

    /// `(C₁′, C₂′, C₃′, C₄′)`.
    pub fn y_blocks(&self) -> [CMatrix; 4] {
        split(&self.y)
    }

    pub fn pair(&self) -> AdmissiblePair {
        let [c1, c2, _, _] = self.x_blocks();
        AdmissiblePair::new(c1, c2, 1e-10).expect("X is invertible, so its top row has full rank")
    }

    /// `‖Y* Ĵ X - J‖`.
    pub fn residual(&self, j: &SignatureMatrix) -> f64 {
        let jc = SignatureMatrix::canonical(self.p());
        (self.y.adjoint() * jc.matrix() * &self.x - j.matrix()).norm()
    }

    /// The same boundary maps written for the original variables `y = U ŷ`
    /// when `self` was built for the frame `Ĵ = U*JU`: `X U*`, `Y U*`.
    pub fn transported(&self, frame: &CMatrix) -> Completion {
        Completion {
            x: &self.x * frame.adjoint(),
            y: &self.y * frame.adjoint(),
        }
    }

    /// `‖X*ĴX - J‖`; the Herglotz-type identities need this to vanish.
    pub fn symplectic_defect(&self, j: &SignatureMatrix) -> f64 {
        let jc = SignatureMatrix::canonical(self.p());
        (self.x.adjoint() * jc.matrix() * &self.x - j.matrix()).norm()
    }

    /// `‖X*X - I‖`; zero for the rotation completions.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.x.nrows();
        (self.x.adjoint() * &self.x - CMatrix::identity(n, n)).norm()
    }
}

fn split(m: &CMatrix) -> [CMatrix; 4] {
    let p = m.nrows() / 2;
    [
        m.view((0, 0), (p, p)).into_owned(),
        m.view((0, p), (p, p)).into_owned(),
        m.view((p, 0), (p, p)).into_owned(),
        m.view((p, p), (p, p)).into_owned(),
    ]
}

/// Extends `(C₁ C₂)` to an invertible `X` with that top row and sets
/// `Y = J⁻¹ X^{-*} J`. Only the canonical `J = (0 -I; I 0)` is accepted.
///
/// The bottom row is the unitary polar factor of the part of `-R̃J` lying
/// in the orthogonal complement of the row space, where `R̃` is `(C₁ C₂)`
/// with orthonormalized rows. For a Lagrangian row with orthonormal rows
/// this reproduces the rotation completion.
pub fn complete_pair(pair: &AdmissiblePair, j: &SignatureMatrix) -> Result<Completion> {
    if j.form() != SignatureForm::Canonical {
        return Err(Error::UnsupportedSignature {
            operation: "complete_pair",
        });
    }
    let p = pair.p();
    if j.dim() != 2 * p {
        return Err(Error::Dimension(format!(
            "pair has p = {p} but J is {0}x{0}",
            j.dim()
        )));
    }
    let r = pair.row();
    let gram = &r * r.adjoint();
    let r_tilde = linalg::hermitian_function(&gram, |s| 1.0 / s.sqrt()) * &r;
    let normal = linalg::complement(&r_tilde.adjoint());
    let t = -(&r_tilde * j.matrix()) * &normal;
    let svd = t.svd(true, true);
    let polar = svd.u.expect("u") * svd.v_t.expect("v_t");
    let bottom = polar * normal.adjoint();
    let x = linalg::vstack(&r, &bottom);

    let x_inv_adj = linalg::inverse(&x.adjoint()).map_err(|_| Error::BoundaryMatrixSingular {
        condition: linalg::condition_number(&x),
    })?;
    let y = j.inverse() * x_inv_adj * j.matrix();
    Completion::new(x, y, j)
}

/// `(Γ₀, Γ₁)` of a boundary value `y(0) = (y₁(0), y₂(0))`.
pub fn gamma_maps(
    comp: &Completion,
    boundary_value: &CVector,
    side: BoundarySide,
) -> (CVector, CVector) {
    let p = comp.p();
    let m = match side {
        BoundarySide::B => &comp.x,
        BoundarySide::A => &comp.y,
    };
    let image = m * boundary_value;
    (image.rows(0, p).into_owned(), image.rows(p, p).into_owned())
}

/// Column-wise `(Γ₀, Γ₁)` of an `n x k` block of boundary values.
pub fn gamma_matrix(
    comp: &Completion,
    boundary_values: &CMatrix,
    side: BoundarySide,
) -> (CMatrix, CMatrix) {
    let p = comp.p();
    let m = match side {
        BoundarySide::B => &comp.x,
        BoundarySide::A => &comp.y,
    };
    let image = m * boundary_values;
    (image.rows(0, p).into_owned(), image.rows(p, p).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, I};

    #[test]
    fn identity_pair_completes_to_identity() {
        let j = SignatureMatrix::canonical(2);
        let pair =
            AdmissiblePair::new(CMatrix::identity(2, 2), CMatrix::zeros(2, 2), 1e-10).unwrap();
        let comp = complete_pair(&pair, &j).unwrap();
        assert!((comp.x.clone() - CMatrix::identity(4, 4)).norm() < 1e-15);
        assert!((comp.y.clone() - CMatrix::identity(4, 4)).norm() < 1e-15);
        assert_eq!(comp.residual(&j), 0.0);
    }

    #[test]
    fn rotation_pair_completes_to_rotation() {
        let j = SignatureMatrix::canonical(1);
        for phi in [0.0, 0.4, 1.3, -2.0] {
            let par = PhiParameter::scalar(1, phi);
            let comp = complete_pair(&par.pair(), &j).unwrap();
            let (s, co) = phi.sin_cos();
            let expected =
                CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0)]);
            assert!((&comp.x - &expected).norm() < 1e-14);
            assert!((&comp.y - &expected).norm() < 1e-14);
            assert!((comp.x.adjoint() * j.matrix() * &comp.x - j.matrix()).norm() < 1e-12);
            assert!(comp.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn diagonal_signature_is_rejected() {
        let pair = PhiParameter::scalar(1, 0.0).pair();
        let err = complete_pair(&pair, &SignatureMatrix::diag_minus_i(1)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedSignature { .. }));
    }

    #[test]
    fn gamma_of_rotation_at_zero_angle() {
        let comp = Completion::rotation(&PhiParameter::scalar(1, 0.0));
        let y0 = CVector::from_vec(vec![c(1.0, 0.0), I]);
        let (g0, g1) = gamma_maps(&comp, &y0, BoundarySide::B);
        assert_eq!((g0[0], g1[0]), (c(1.0, 0.0), I));
        let (h0, h1) = gamma_maps(&Completion::identity(1), &y0, BoundarySide::A);
        assert_eq!((h0[0], h1[0]), (c(1.0, 0.0), I));
    }
}
