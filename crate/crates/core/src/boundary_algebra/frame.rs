use crate::dirac_core::{kappa, SignatureForm, SignatureMatrix};
use crate::linalg::{self, c, I};
use crate::{CMatrix, Error, Result};

/// Unitary `U` with `U* J U = (0 -I; I 0)`.
///
/// `U = E F*`, where `E = [E₊ E₋]` stacks orthonormal bases of the `±i`
/// eigenspaces of `J` and `F` does the same for the canonical matrix.
/// Requires `κ₊ = κ₋`.
pub fn canonical_frame(j: &SignatureMatrix) -> Result<CMatrix> {
    let n = j.dim();
    if j.form() == SignatureForm::Canonical {
        return Ok(CMatrix::identity(n, n));
    }
    let (kp, km) = kappa(j, 1e-10);
    if kp != km {
        return Err(Error::UnsupportedSignature {
            operation: "canonical_frame (κ₊ ≠ κ₋)",
        });
    }
    let p = kp;
    let e = match j.form() {
        // +i eigenvectors sit in the second block
        SignatureForm::DiagMinusI => swap(p),
        SignatureForm::IDiag => CMatrix::identity(n, n),
        _ => {
            let id = CMatrix::identity(n, n);
            let plus = linalg::null_space(&(j.matrix() - &id * I), 1e-8);
            let minus = linalg::null_space(&(j.matrix() + &id * I), 1e-8);
            if plus.ncols() != p || minus.ncols() != p {
                return Err(Error::InvalidSignature(
                    "eigenspaces of J are not resolved".into(),
                ));
            }
            linalg::hstack(&plus, &minus)
        }
    };
    let f = canonical_eigenbasis(p);
    Ok(e * f.adjoint())
}

/// `F = (1/√2)(I, I; -iI, iI)`: columns are the `+i` then `-i` eigenvectors of
/// the canonical matrix.
fn canonical_eigenbasis(p: usize) -> CMatrix {
    let s = 1.0 / 2f64.sqrt();
    let id = CMatrix::identity(p, p);
    linalg::blocks(
        &(&id * c(s, 0.0)),
        &(&id * c(s, 0.0)),
        &(&id * c(0.0, -s)),
        &(&id * c(0.0, s)),
    )
}

fn swap(p: usize) -> CMatrix {
    let id = CMatrix::identity(p, p);
    let zero = CMatrix::zeros(p, p);
    linalg::blocks(&zero, &id, &id, &zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_reach_canonical_form() {
        for p in 1..=3 {
            let target = SignatureMatrix::canonical(p);
            for j in [
                SignatureMatrix::canonical(p),
                SignatureMatrix::i_diag(p),
                SignatureMatrix::diag_minus_i(p),
                SignatureMatrix::canonical(p).negated(),
            ] {
                let u = canonical_frame(&j).unwrap();
                let n = 2 * p;
                assert!((u.adjoint() * &u - CMatrix::identity(n, n)).norm() < 1e-14);
                assert!((u.adjoint() * j.matrix() * &u - target.matrix()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unbalanced_signature_has_no_frame() {
        let j = SignatureMatrix::new(CMatrix::identity(2, 2) * I).unwrap();
        assert!(matches!(
            canonical_frame(&j),
            Err(Error::UnsupportedSignature { .. })
        ));
    }
}
