use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::solution::WeylSample;
use crate::boundary_algebra::Completion;
use crate::dirac_core::{simpson_matrix, DiracExpression, Regime};
use crate::linalg::{self, I};
use crate::{CMatrix, Error, Result, Tolerances};

/// Residuals of the two integral identities of the Weyl function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HerglotzResiduals {
    /// `‖M(λ) - M(μ)* - ∫ v(μ)*((λ - μ̄) - 2iQ₂) v(λ)‖`.
    pub eq339: f64,
    /// `‖Im M(λ) - ∫ v(λ)*(Im λ - Q₂) v(λ)‖`.
    pub eq340: f64,
    pub mu: Complex64,
    /// Grid-halving estimate of the quadrature error.
    pub quadrature_error: f64,
}

fn converged_m(sample: &WeylSample) -> Result<&CMatrix> {
    sample.m.as_ref().ok_or_else(|| {
        Error::NotConverged(format!(
            "Weyl sample at λ = {} did not converge",
            sample.lambda
        ))
    })
}

/// Both identities for the pair `(λ, μ)`; `eq340` refers to `λ`.
/// Requires `X* J X = J` for the completion.
pub fn herglotz_residuals(
    expr: &DiracExpression,
    comp: &Completion,
    at_lambda: &WeylSample,
    at_mu: &WeylSample,
) -> Result<HerglotzResiduals> {
    let m_lambda = converged_m(at_lambda)?;
    let m_mu = converged_m(at_mu)?;
    let defect = comp.symplectic_defect(expr.signature());
    if !(defect < 1e-10) {
        return Err(Error::InvalidArgument(format!(
            "the identities need X*ĴX = J; this completion is off by {defect:.3e}"
        )));
    }
    let (lambda, mu) = (at_lambda.lambda, at_mu.lambda);
    let a = &at_lambda.solution;
    let b = &at_mu.solution;
    let h = a.step();
    let same_grid = (b.step() - h).abs() <= 1e-12 * h;
    let end = a.length().min(b.length());
    let count = ((end / h).round() as usize + 1).min(a.grid.len());
    let n = expr.dim();
    let id = CMatrix::identity(n, n);

    let mut cross = Vec::with_capacity(count);
    let mut diagonal = Vec::with_capacity(count);
    for k in 0..count {
        let x = a.grid[k];
        let q2 = expr.potential().q2(x);
        let va = &a.values[k];
        let vb = if same_grid && k < b.grid.len() {
            b.values[k].clone()
        } else {
            b.at(x)
        };
        let weight = &id * (lambda - mu.conj()) - &q2 * (I * 2.0);
        cross.push(vb.adjoint() * weight * va);
        diagonal.push(va.adjoint() * (&id * linalg::re(lambda.im) - &q2) * va);
    }
    let (int_cross, err_cross) = simpson_matrix(&cross, h);
    let (int_diag, err_diag) = simpson_matrix(&diagonal, h);

    let lhs_cross = m_lambda - m_mu.adjoint();
    let im_m = (m_lambda - m_lambda.adjoint()) / (I * 2.0);
    Ok(HerglotzResiduals {
        eq339: linalg::op_norm(&(lhs_cross - int_cross)),
        eq340: linalg::op_norm(&(im_m - int_diag)),
        mu,
        quadrature_error: err_cross.max(err_diag),
    })
}

/// Smallest eigenvalue of `Im M` together with the regime of `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    pub min_eig_im_m: f64,
    pub max_eig_im_m: f64,
    pub side: Regime,
}

impl SignCheck {
    /// Positive `Im M` above the strip, negative below; no claim inside.
    pub fn holds(&self) -> Option<bool> {
        match self.side {
            Regime::Upper => Some(self.min_eig_im_m > 0.0),
            Regime::Lower => Some(self.max_eig_im_m < 0.0),
            Regime::Strip => None,
        }
    }
}

pub fn sign_check(sample: &WeylSample) -> Result<SignCheck> {
    let m = converged_m(sample)?;
    let im_m = (m - m.adjoint()) / (I * 2.0);
    let (values, _) = linalg::hermitian_eigen(&im_m);
    Ok(SignCheck {
        min_eig_im_m: values[0],
        max_eig_im_m: values[values.len() - 1],
        side: sample.regime,
    })
}

/// `M_s = (M₀ - i)(M₀ + i)⁻¹`.
pub fn cayley(m0: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let p = m0.nrows();
    let id = CMatrix::identity(p, p);
    let den = m0 + &id * I;
    let condition = linalg::condition_number(&den);
    if !(condition <= tol.singular_condition) {
        return Err(Error::CayleySingular { condition });
    }
    linalg::right_divide(&(m0 - &id * I), &den).map_err(|_| Error::CayleySingular { condition })
}

/// Cayley transform of a converged Weyl function.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurSample {
    pub lambda: Complex64,
    pub m_s: CMatrix,
    pub operator_norm: f64,
}

impl SchurSample {
    pub fn from_weyl(sample: &WeylSample, tol: &Tolerances) -> Result<Self> {
        let m_s = cayley(converged_m(sample)?, tol)?;
        Ok(Self {
            lambda: sample.lambda,
            operator_norm: linalg::op_norm(&m_s),
            m_s,
        })
    }
}
