use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expression::DiracExpression;
use super::signature::flip_conjugate;
use crate::linalg;
use crate::ode::Side;
use crate::Tolerances;

/// Pointwise symmetry classes of an expression, decided on sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub formally_selfadjoint: bool,
    /// `j̃ J j̃ = J` and `j̃ Q(x) j̃ = Q(x)*` everywhere sampled.
    pub j_symmetric: bool,
    /// Why `j_symmetric` is false, when it is.
    pub j_symmetry_note: Option<String>,
    pub almost_fsa: bool,
    pub alpha_q: Option<f64>,
    pub beta_q: Option<f64>,
    pub p: Option<usize>,
    pub max_q2_norm: f64,
    pub points_checked: usize,
}

pub fn classify(expr: &DiracExpression, tol: &Tolerances) -> SymmetryReport {
    let n = expr.dim();
    let (lo, hi) = expr.interval().window();
    let potential = expr.potential();
    let points = potential.sample_points(lo, hi, tol.classify_samples);

    let mut max_q2 = 0.0_f64;
    let mut finite = true;
    let mut j_note: Option<String> = None;

    let j_ok = if n % 2 == 1 {
        j_note = Some("n odd".into());
        false
    } else {
        let j = expr.signature().matrix();
        let defect = (flip_conjugate(j) - j).norm();
        if defect > tol.symmetry_tol {
            j_note = Some(format!(
                "J is not invariant under the flip conjugation (defect {defect:.3e})"
            ));
            false
        } else {
            true
        }
    };
    let mut q_ok = j_ok;

    for &x in &points {
        for side in [Side::Left, Side::Right] {
            let q = potential.eval(x, side);
            if q.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                finite = false;
                continue;
            }
            let q2 = linalg::imaginary_part(&q);
            max_q2 = max_q2.max(linalg::op_norm(&q2));
            if q_ok {
                let scale = q.norm().max(1.0);
                let defect = (flip_conjugate(&q) - q.adjoint()).norm();
                if defect > tol.symmetry_tol * scale {
                    q_ok = false;
                    j_note = Some(format!(
                        "flip-conjugation condition fails at x = {x} (defect {defect:.3e})"
                    ));
                }
            }
        }
    }

    let formally_selfadjoint = finite && max_q2 <= tol.symmetry_tol;
    let almost_fsa = finite && max_q2 <= tol.bounded_cap;
    let (alpha, beta) = if formally_selfadjoint {
        (Some(0.0), Some(0.0))
    } else if almost_fsa {
        let (a, b) = potential.imaginary_bounds(&points);
        (Some(a), Some(b))
    } else {
        (None, None)
    };

    SymmetryReport {
        formally_selfadjoint,
        j_symmetric: q_ok,
        j_symmetry_note: if q_ok { None } else { j_note },
        almost_fsa,
        alpha_q: alpha,
        beta_q: beta,
        p: n.is_multiple_of(2).then_some(n / 2),
        max_q2_norm: max_q2,
        points_checked: points.len(),
    }
}

/// Position of `Im λ` relative to the strip `α_Q ≤ Im λ ≤ β_Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Upper,
    Lower,
    Strip,
}

impl Regime {
    pub fn of(lambda: Complex64, alpha: f64, beta: f64) -> Self {
        if lambda.im > beta {
            Regime::Upper
        } else if lambda.im < alpha {
            Regime::Lower
        } else {
            Regime::Strip
        }
    }

    /// Distance from `Im λ` to the nearest strip edge (zero inside the strip).
    pub fn distance(lambda: Complex64, alpha: f64, beta: f64) -> f64 {
        if lambda.im > beta {
            lambda.im - beta
        } else if lambda.im < alpha {
            alpha - lambda.im
        } else {
            0.0
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Upper => "upper",
            Regime::Lower => "lower",
            Regime::Strip => "strip",
        }
    }
}

/// `(α_Q, β_Q)` of an expression on its numerical window.
pub fn strip_bounds(expr: &DiracExpression, tol: &Tolerances) -> (f64, f64) {
    let (lo, hi) = expr.interval().window();
    let pts = expr.potential().sample_points(lo, hi, tol.classify_samples);
    expr.potential().imaginary_bounds(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac_core::{Interval, PotentialSpec, SignatureMatrix};
    use crate::linalg::{c, real_matrix, I};
    use crate::CMatrix;

    fn half(cap: f64) -> Interval {
        Interval::HalfLine { cap }
    }

    #[test]
    fn zero_potential_is_formally_selfadjoint() {
        for n in [1usize, 2, 3, 4] {
            let j = if n.is_multiple_of(2) {
                SignatureMatrix::canonical(n / 2)
            } else {
                SignatureMatrix::new(CMatrix::identity(n, n) * I).unwrap()
            };
            let e = DiracExpression::new(j, PotentialSpec::zero(n), half(10.0)).unwrap();
            let r = classify(&e, &Tolerances::default());
            assert!(r.formally_selfadjoint && r.almost_fsa);
            assert_eq!((r.alpha_q, r.beta_q), (Some(0.0), Some(0.0)));
            if n % 2 == 1 {
                assert!(!r.j_symmetric);
                assert_eq!(r.j_symmetry_note.as_deref(), Some("n odd"));
            }
        }
    }

    #[test]
    fn nls_offdiag_with_symmetric_q_is_j_symmetric() {
        let e = DiracExpression::new(
            SignatureMatrix::i_diag(1),
            PotentialSpec::nls_offdiag(real_matrix(1, 1, &[1.0]), 1.0).unwrap(),
            half(20.0),
        )
        .unwrap();
        let r = classify(&e, &Tolerances::default());
        assert!(r.j_symmetric, "{:?}", r.j_symmetry_note);
        assert!(!r.formally_selfadjoint);

        let e2 = DiracExpression::new(
            SignatureMatrix::i_diag(2),
            PotentialSpec::nls_offdiag(real_matrix(2, 2, &[1.0, 0.3, -0.3, 0.5]), 1.0).unwrap(),
            half(20.0),
        )
        .unwrap();
        assert!(!classify(&e2, &Tolerances::default()).j_symmetric);
    }

    #[test]
    fn constant_imaginary_shift_is_almost_fsa() {
        let q1 = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.3, 0.0), c(0.2, -0.1), c(0.2, 0.1), c(-0.3, 0.0)],
        );
        let q = q1 + CMatrix::identity(2, 2) * c(0.0, 0.5);
        let e = DiracExpression::new(
            SignatureMatrix::canonical(1),
            PotentialSpec::constant(q).unwrap(),
            half(10.0),
        )
        .unwrap();
        let r = classify(&e, &Tolerances::default());
        assert!(r.almost_fsa && !r.formally_selfadjoint);
        assert!((r.alpha_q.unwrap() - 0.5).abs() < 1e-14);
        assert!((r.beta_q.unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn regimes_split_at_the_strip_edges() {
        assert_eq!(Regime::of(c(0.0, 1.0), 0.0, 0.5), Regime::Upper);
        assert_eq!(Regime::of(c(3.0, 0.5), 0.0, 0.5), Regime::Strip);
        assert_eq!(Regime::of(c(0.0, -0.1), 0.0, 0.5), Regime::Lower);
        assert_eq!(Regime::distance(c(0.0, 2.0), 0.5, 0.5), 1.5);
        assert_eq!(Regime::distance(c(0.0, 0.2), 0.0, 0.5), 0.0);
    }

    #[test]
    fn canonical_signature_is_not_j_symmetric() {
        let e = DiracExpression::new(
            SignatureMatrix::canonical(1),
            PotentialSpec::zero(2),
            half(1.0),
        )
        .unwrap();
        let r = classify(&e, &Tolerances::default());
        assert!(!r.j_symmetric);
        assert!(r.j_symmetry_note.unwrap().contains("flip"));
    }
}
