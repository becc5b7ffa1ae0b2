#![allow(dead_code)]

use dirac_weyl::boundary_algebra::Completion;
use dirac_weyl::dirac_core::{DiracExpression, Interval, PotentialSpec, SignatureMatrix};
use dirac_weyl::linalg::{self, c};
use dirac_weyl::{CMatrix, CVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let a = random_matrix(rng, n, n);
    (&a + a.adjoint()).scale(0.5)
}

/// `Q = Q₁ + iQ₂` with both parts Hermitian and `‖Q₂‖ ≤ 1`.
pub fn random_potential(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let q1 = hermitian(rng, n);
    let mut q2 = hermitian(rng, n);
    let norm = linalg::op_norm(&q2);
    let target = rng.random_range(0.1..1.0);
    q2 *= c(target / norm, 0.0);
    q1 + q2 * c(0.0, 1.0)
}

pub fn half_line(j: SignatureMatrix, q: CMatrix) -> DiracExpression {
    DiracExpression::new(
        j,
        PotentialSpec::constant(q).unwrap(),
        Interval::HalfLine { cap: 200.0 },
    )
    .unwrap()
}

/// Largest eigenvalue of `(Q - Q*)/2i`.
pub fn beta(q: &CMatrix) -> f64 {
    let q2 = (q - q.adjoint()) / c(0.0, 2.0);
    let (values, _) = linalg::hermitian_eigen(&q2);
    values[values.len() - 1]
}

pub fn alpha(q: &CMatrix) -> f64 {
    let q2 = (q - q.adjoint()) / c(0.0, 2.0);
    linalg::hermitian_eigen(&q2).0[0]
}

/// Eigenvectors of `J⁻¹(λ - Q)` for eigenvalues with negative real part,
/// each one the smallest right singular vector of `A - μI`.
pub fn decaying_eigenvectors(j: &SignatureMatrix, q: &CMatrix, lambda: Complex64) -> CMatrix {
    let n = q.nrows();
    let a = j.inverse() * (CMatrix::identity(n, n) * lambda - q);
    let mus: Vec<Complex64> = a
        .clone()
        .schur()
        .eigenvalues()
        .expect("eigenvalues")
        .iter()
        .copied()
        .filter(|mu| mu.re < 0.0)
        .collect();
    let mut columns = Vec::new();
    for mu in mus {
        let shifted = &a - CMatrix::identity(n, n) * mu;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.unwrap();
        let (k, _) =
            svd.singular_values
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |best, (i, &s)| if s < best.1 { (i, s) } else { best },
                );
        columns.push(v_t.row(k).adjoint());
    }
    CMatrix::from_columns(&columns)
}

/// Weyl function for constant `Q`, canonical `J` and `X = I`:
/// `M = V₂ V₁⁻¹` for the decaying eigenvectors `V = (V₁; V₂)`.
pub fn constant_weyl_oracle(q: &CMatrix, lambda: Complex64) -> CMatrix {
    let p = q.nrows() / 2;
    let v = decaying_eigenvectors(&SignatureMatrix::canonical(p), q, lambda);
    assert_eq!(v.ncols(), p, "expected p decaying directions");
    let v1 = v.rows(0, p).into_owned();
    let v2 = v.rows(p, p).into_owned();
    v2 * v1.try_inverse().expect("V₁ invertible")
}

/// `M = (X₂V)(X₁V)⁻¹` for the decaying eigenvectors `V` of the constant
/// system, with `X = (X₁; X₂)` split into its top and bottom rows.
pub fn weyl_oracle(
    j: &SignatureMatrix,
    q: &CMatrix,
    lambda: Complex64,
    comp: &Completion,
) -> CMatrix {
    let p = q.nrows() / 2;
    let v = decaying_eigenvectors(j, q, lambda);
    assert_eq!(v.ncols(), p, "expected p decaying directions");
    let top = comp.x.rows(0, p) * &v;
    let bottom = comp.x.rows(p, p) * &v;
    bottom * top.try_inverse().expect("boundary matrix invertible")
}
