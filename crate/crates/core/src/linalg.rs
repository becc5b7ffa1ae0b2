//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CMatrix, Error, Result};

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real scalar as a complex one, for scaling complex matrices.
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Builds a complex matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    DMatrix::from_row_slice(rows, cols, data).map(|v| c(v, 0.0))
}

pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Assembles `[[a, b], [c, d]]` from equally shaped square blocks.
pub fn blocks(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let p = a.nrows();
    let mut out = CMatrix::zeros(2 * p, 2 * p);
    out.view_mut((0, 0), (p, p)).copy_from(a);
    out.view_mut((0, p), (p, p)).copy_from(b);
    out.view_mut((p, 0), (p, p)).copy_from(c);
    out.view_mut((p, p), (p, p)).copy_from(d);
    out
}

pub fn vstack(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

pub fn hstack(left: &CMatrix, right: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.columns_mut(0, left.ncols()).copy_from(left);
    out.columns_mut(left.ncols(), right.ncols())
        .copy_from(right);
    out
}

/// `(Q + Q*)/2`.
pub fn hermitian_part(q: &CMatrix) -> CMatrix {
    (q + q.adjoint()).scale(0.5)
}

/// `(Q - Q*)/(2i)`, Hermitian by construction.
pub fn imaginary_part(q: &CMatrix) -> CMatrix {
    (q - q.adjoint()) * c(0.0, -0.5)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Numerical rank with threshold `rel_tol · σ_max`.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Orthonormal basis of the column space.
pub fn orth(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return CMatrix::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd with u");
    let top = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return CMatrix::zeros(n, 0);
    }
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * top)
        .collect();
    let mut out = CMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// (orthonormal) columns of `basis` in `C^n`: the trailing columns of the
/// Householder `Q` of `[basis | I]`. An SVD of the projector `I - BB*` is
/// not used; its singular values are degenerate and the left vectors
/// nalgebra returns for them can leak out of the range.
pub fn complement(basis: &CMatrix) -> CMatrix {
    let n = basis.nrows();
    let k = basis.ncols();
    if k == 0 {
        return CMatrix::identity(n, n);
    }
    if k >= n {
        return CMatrix::zeros(n, 0);
    }
    let q = hstack(basis, &CMatrix::identity(n, n)).qr().q();
    let tail = q.columns(k, n - k).into_owned();
    // one projection pass removes the residual overlap with the basis
    let cleaned = &tail - basis * (basis.adjoint() * &tail);
    cleaned.qr().q()
}

/// Orthonormal basis of `ker m`.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    complement(&orth(&m.adjoint(), rel_tol))
}

/// Sine of the largest principal angle between two orthonormal bases of
/// equal dimension; `1.0` when the dimensions differ.
pub fn max_principal_sine(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.ncols() != b.ncols() || a.nrows() != b.nrows() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let residual = b - a * (a.adjoint() * b);
    op_norm(&residual).min(1.0)
}

pub fn max_principal_angle(a: &CMatrix, b: &CMatrix) -> f64 {
    max_principal_sine(a, b).asin()
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and
/// matching orthonormal eigenvectors.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = hermitian_part(h);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(h.nrows(), h.ncols());
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// `f(H)` for Hermitian `H` through its spectral decomposition.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(f(v), 0.0)),
    ));
    &vectors * diag * vectors.adjoint()
}

pub fn min_hermitian_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_eigen(h).0.first().copied().unwrap_or(0.0)
}

pub fn max_hermitian_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_eigen(h).0.last().copied().unwrap_or(0.0)
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("matrix is singular".into()))
}

/// Solves `X · m = rhs` for `X`.
pub fn right_divide(rhs: &CMatrix, m: &CMatrix) -> Result<CMatrix> {
    let lu = m.adjoint().lu();
    lu.solve(&rhs.adjoint())
        .map(|x| x.adjoint())
        .ok_or_else(|| Error::InvalidArgument("matrix is singular".into()))
}

/// Eigenvalues of a general complex matrix via the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    m.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default()
}

/// Matrix sign function by scaled Newton iteration. Fails when an eigenvalue
/// sits on (or numerically next to) the imaginary axis.
pub fn matrix_sign(a: &CMatrix, max_iter: usize, tol: f64) -> Result<CMatrix> {
    let n = a.nrows();
    let mut s = a.clone();
    for _ in 0..max_iter {
        let inv = inverse(&s)
            .map_err(|_| Error::InvalidArgument("sign iteration hit a singular iterate".into()))?;
        let det = s.determinant().norm();
        let scale = if det.is_finite() && det > 0.0 {
            det.powf(-1.0 / n as f64)
        } else {
            1.0
        };
        let next = (s.scale(scale) + inv.scale(1.0 / scale)).scale(0.5);
        let delta = (&next - &s).norm() / next.norm().max(1.0);
        s = next;
        if delta < tol {
            // a few unscaled polishing steps
            for _ in 0..2 {
                let inv = inverse(&s)?;
                s = (&s + inv).scale(0.5);
            }
            return Ok(s);
        }
    }
    Err(Error::InvalidArgument(
        "matrix sign iteration did not converge (eigenvalue near the imaginary axis)".into(),
    ))
}

/// Invariant subspace of `a` belonging to eigenvalues with negative real part.
#[derive(Debug, Clone)]
pub struct StableSubspace {
    pub basis: CMatrix,
    /// Smallest `|Re μ|` over the spectrum.
    pub gap: f64,
}

pub fn stable_subspace(a: &CMatrix) -> Result<StableSubspace> {
    let n = a.nrows();
    let gap = eigenvalues(a)
        .iter()
        .map(|z| z.re.abs())
        .fold(f64::INFINITY, f64::min);
    if !(gap > 0.0) {
        return Err(Error::InvalidArgument(
            "coefficient matrix has an eigenvalue on the imaginary axis".into(),
        ));
    }
    let sign = matrix_sign(a, 100, 1e-14)?;
    let projector = (CMatrix::identity(n, n) - sign).scale(0.5);
    let count = projector.trace().re.round().max(0.0) as usize;
    let basis = orth(&projector, 1e-8);
    if basis.ncols() != count {
        return Err(Error::InvalidArgument(format!(
            "stable projector rank {} disagrees with trace {}",
            basis.ncols(),
            count
        )));
    }
    Ok(StableSubspace { basis, gap })
}

/// Thin QR with a unit-modulus-normalized positive real diagonal on `R`.
pub fn qr_thin(m: &CMatrix) -> (CMatrix, CMatrix) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for j in 0..r.nrows() {
        let d = r[(j, j)];
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d / mag;
            for k in 0..r.ncols() {
                r[(j, k)] /= phase;
            }
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    (q, r)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
