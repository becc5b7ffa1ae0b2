use serde::{Deserialize, Serialize};

use crate::linalg::{self, I};
use crate::{CMatrix, Error, Result};

/// Recognized shapes of the signature matrix. Frame adapters key off this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignatureForm {
    /// `(0 -I_p; I_p 0)`.
    Canonical,
    /// `i·diag(I_p, -I_p)`.
    IDiag,
    /// `diag(-i I_p, i I_p)`.
    DiagMinusI,
    Explicit,
}

/// Constant matrix `J` with `J* = J⁻¹ = -J`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureMatrix {
    matrix: CMatrix,
    form: SignatureForm,
}

const SIGNATURE_TOL: f64 = 1e-12;

impl SignatureMatrix {
    /// Validates `J* = -J` and `J*J = I` to `1e-12`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::InvalidSignature(format!(
                "expected a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let skew = (matrix.adjoint() + &matrix).norm();
        let unitary = (matrix.adjoint() * &matrix - CMatrix::identity(n, n)).norm();
        if skew >= SIGNATURE_TOL || unitary >= SIGNATURE_TOL {
            return Err(Error::InvalidSignature(format!(
                "‖J* + J‖ = {skew:.3e}, ‖J*J - I‖ = {unitary:.3e}"
            )));
        }
        let form = detect_form(&matrix);
        Ok(Self { matrix, form })
    }

    pub fn canonical(p: usize) -> Self {
        let id = CMatrix::identity(p, p);
        let zero = CMatrix::zeros(p, p);
        Self {
            matrix: linalg::blocks(&zero, &(-&id), &id, &zero),
            form: SignatureForm::Canonical,
        }
    }

    pub fn i_diag(p: usize) -> Self {
        let id = CMatrix::identity(p, p) * I;
        Self {
            matrix: linalg::block_diag(&id, &(-&id)),
            form: SignatureForm::IDiag,
        }
    }

    pub fn diag_minus_i(p: usize) -> Self {
        let id = CMatrix::identity(p, p) * I;
        Self {
            matrix: linalg::block_diag(&(-&id), &id),
            form: SignatureForm::DiagMinusI,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn half_dim(&self) -> Option<usize> {
        self.dim().is_multiple_of(2).then_some(self.dim() / 2)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn form(&self) -> SignatureForm {
        self.form
    }

    /// `J⁻¹ = -J`.
    pub fn inverse(&self) -> CMatrix {
        -&self.matrix
    }

    pub fn negated(&self) -> Self {
        let matrix = -&self.matrix;
        let form = detect_form(&matrix);
        Self { matrix, form }
    }

    /// Deviation from the defining identities: `(‖J* + J‖, ‖J*J - I‖)`.
    pub fn residuals(&self) -> (f64, f64) {
        let n = self.dim();
        (
            (self.matrix.adjoint() + &self.matrix).norm(),
            (self.matrix.adjoint() * &self.matrix - CMatrix::identity(n, n)).norm(),
        )
    }
}

fn detect_form(m: &CMatrix) -> SignatureForm {
    let n = m.nrows();
    if n % 2 == 1 {
        return SignatureForm::Explicit;
    }
    let p = n / 2;
    for (form, candidate) in [
        (
            SignatureForm::Canonical,
            SignatureMatrix::canonical(p).matrix,
        ),
        (SignatureForm::IDiag, SignatureMatrix::i_diag(p).matrix),
        (
            SignatureForm::DiagMinusI,
            SignatureMatrix::diag_minus_i(p).matrix,
        ),
    ] {
        if linalg::max_abs_diff(m, &candidate) < SIGNATURE_TOL {
            return form;
        }
    }
    SignatureForm::Explicit
}

/// `(κ₊, κ₋) = (dim ker(J + iI), dim ker(J - iI))`, kernel dimensions by
/// singular values below `rank_threshold · ‖J‖`.
pub fn kappa(j: &SignatureMatrix, rank_threshold: f64) -> (usize, usize) {
    let n = j.dim();
    let id = CMatrix::identity(n, n);
    let scale = linalg::op_norm(j.matrix()).max(1.0);
    let kernel_dim = |m: CMatrix| {
        linalg::singular_values(&m)
            .iter()
            .filter(|&&s| s <= rank_threshold * scale)
            .count()
    };
    (
        kernel_dim(j.matrix() + &id * I),
        kernel_dim(j.matrix() - &id * I),
    )
}

/// The flip-conjugation partner `U = (0 I_p; I_p 0)`; `j̃_n h = U h̄`.
pub fn flip(p: usize) -> CMatrix {
    let id = CMatrix::identity(p, p);
    let zero = CMatrix::zeros(p, p);
    linalg::blocks(&zero, &id, &id, &zero)
}

/// `j̃_n M j̃_n = U M̄ U` for a matrix acting on `C^{2p}`.
pub fn flip_conjugate(m: &CMatrix) -> CMatrix {
    let u = flip(m.nrows() / 2);
    &u * m.map(|z| z.conj()) * &u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;

    #[test]
    fn builders_satisfy_invariants() {
        for p in 1..4 {
            for j in [
                SignatureMatrix::canonical(p),
                SignatureMatrix::i_diag(p),
                SignatureMatrix::diag_minus_i(p),
            ] {
                let (a, b) = j.residuals();
                assert!(a < 1e-12 && b < 1e-12);
                let (kp, km) = kappa(&j, 1e-10);
                assert_eq!(kp + km, j.dim());
                assert_eq!(
                    SignatureMatrix::new(j.matrix().clone()).unwrap().form(),
                    j.form()
                );
            }
        }
    }

    #[test]
    fn kappa_examples() {
        let j = SignatureMatrix::new(real_matrix(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
        assert_eq!(j.form(), SignatureForm::Canonical);
        assert_eq!(kappa(&j, 1e-10), (1, 1));
        assert_eq!(kappa(&SignatureMatrix::i_diag(3), 1e-10), (3, 3));
        assert_eq!(kappa(&SignatureMatrix::diag_minus_i(1), 1e-10), (1, 1));
    }

    #[test]
    fn odd_and_unbalanced_signatures() {
        let j = SignatureMatrix::new(CMatrix::from_element(1, 1, I)).unwrap();
        assert_eq!(kappa(&j, 1e-10), (0, 1));
        assert_eq!(j.half_dim(), None);
        let j3 = SignatureMatrix::new(CMatrix::from_diagonal(&crate::CVector::from_vec(vec![
            I, I, -I,
        ])))
        .unwrap();
        assert_eq!(kappa(&j3, 1e-10), (1, 2));
    }

    #[test]
    fn rejects_non_signature() {
        assert!(SignatureMatrix::new(real_matrix(2, 2, &[1.0, 0.0, 0.0, 1.0])).is_err());
        assert!(SignatureMatrix::new(real_matrix(2, 2, &[0.0, -2.0, 0.5, 0.0])).is_err());
    }

    #[test]
    fn flip_conjugation_preserves_i_diag() {
        let j = SignatureMatrix::i_diag(2);
        assert!(linalg::max_abs_diff(&flip_conjugate(j.matrix()), j.matrix()) < 1e-15);
        let canon = SignatureMatrix::canonical(2);
        assert!(linalg::max_abs_diff(&flip_conjugate(canon.matrix()), canon.matrix()) > 0.5);
    }
}
