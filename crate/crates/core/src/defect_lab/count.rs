use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac_core::{classify, kappa, DiracExpression, Interval, Regime};
use crate::linalg;
use crate::ode;
use crate::{CMatrix, Error, Result, Tolerances};

/// Number of L² solutions at one `λ`, read off growth exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub lambda: Complex64,
    /// Exponents strictly below `-margin`.
    pub count: usize,
    /// Per-column growth exponents of the orthonormalized frame, largest first.
    pub exponents: Vec<f64>,
    pub regime: Regime,
    pub margin: f64,
    /// Some exponent lies within `±margin` of zero.
    pub indeterminate: bool,
    pub offending_exponent: Option<f64>,
    /// Predicted count (`κ₊`, `κ₋` or `p`) when theory fixes one.
    pub expected: Option<usize>,
    pub expected_source: Option<String>,
    pub length: f64,
}

impl DefectReport {
    /// `None` when there is no prediction; indeterminate reports never pass.
    pub fn pass(&self) -> Option<bool> {
        self.expected
            .map(|e| !self.indeterminate && e == self.count)
    }
}

/// Counts decaying directions of `J y' + Q y = λ y` on `[0, length]` by
/// integrating a full orthonormal frame forward and regressing the
/// accumulated `log R_jj` over the last part of the interval.
pub fn count_l2(
    expr: &DiracExpression,
    lambda: Complex64,
    length: f64,
    tol: &Tolerances,
) -> Result<DefectReport> {
    let cap = match expr.interval() {
        Interval::HalfLine { cap } => cap,
        other => {
            return Err(Error::InvalidArgument(format!(
                "L² counts need a half-line expression, got {other:?}"
            )))
        }
    };
    if !(length > 0.0 && length <= cap) {
        return Err(Error::InvalidArgument(format!(
            "count length {length} must lie in (0, {cap}]"
        )));
    }
    let n = expr.dim();
    let grid = ode::uniform_grid(0.0, length, tol.output_step);
    let system = expr.system(lambda);
    let mut logs: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    let mut running = vec![0.0; n];
    ode::integrate(
        &system,
        0.0,
        CMatrix::identity(n, n),
        &grid,
        tol,
        |_, _, y| {
            let (q, r) = linalg::qr_thin(y);
            for (j, acc) in running.iter_mut().enumerate() {
                *acc += r[(j, j)].re.ln();
            }
            logs.push(running.clone());
            *y = q;
        },
    )?;

    let start = grid.partition_point(|&x| x < length * (1.0 - tol.regression_fraction));
    let xs = &grid[start..];
    let mean_x = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let mut exponents: Vec<f64> = (0..n)
        .map(|j| {
            let ys: Vec<f64> = logs[start..].iter().map(|l| l[j]).collect();
            let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
            xs.iter()
                .zip(&ys)
                .map(|(x, y)| (x - mean_x) * (y - mean_y))
                .sum::<f64>()
                / sxx
        })
        .collect();
    exponents.sort_by(|a, b| b.total_cmp(a));

    let report = classify(expr, tol);
    let (alpha, beta) = (
        report.alpha_q.unwrap_or(f64::NEG_INFINITY),
        report.beta_q.unwrap_or(f64::INFINITY),
    );
    let regime = if report.almost_fsa {
        Regime::of(lambda, alpha, beta)
    } else {
        Regime::Strip
    };
    let margin = tol.margin_fraction * Regime::distance(lambda, alpha, beta);
    let offending = exponents.iter().copied().find(|e| e.abs() <= margin);
    let count = exponents.iter().filter(|&&e| e < -margin).count();

    let (kp, km) = kappa(expr.signature(), tol.rank_threshold);
    let (expected, source) = match regime {
        Regime::Upper => (Some(kp), Some("κ₊".to_string())),
        Regime::Lower => (Some(km), Some("κ₋".to_string())),
        Regime::Strip if report.j_symmetric && report.almost_fsa => (None, None),
        Regime::Strip if report.j_symmetric => (report.p, Some("p (j-symmetric)".to_string())),
        Regime::Strip => (None, None),
    };
    Ok(DefectReport {
        lambda,
        count,
        exponents,
        regime,
        margin,
        indeterminate: offending.is_some(),
        offending_exponent: offending,
        expected,
        expected_source: source,
        length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac_core::{PotentialSpec, SignatureMatrix};
    use crate::linalg::I;

    #[test]
    fn free_canonical_has_one_decaying_mode() {
        let e = DiracExpression::new(
            SignatureMatrix::canonical(1),
            PotentialSpec::zero(2),
            Interval::HalfLine { cap: 40.0 },
        )
        .unwrap();
        let r = count_l2(&e, I, 20.0, &Tolerances::default()).unwrap();
        assert_eq!(r.count, 1);
        assert!((r.exponents[0] - 1.0).abs() < 1e-6 && (r.exponents[1] + 1.0).abs() < 1e-6);
        assert_eq!(r.pass(), Some(true));
    }

    #[test]
    fn scalar_signature_has_no_decay_above() {
        let j = SignatureMatrix::new(CMatrix::from_element(1, 1, I)).unwrap();
        let e = DiracExpression::new(j, PotentialSpec::zero(1), Interval::HalfLine { cap: 20.0 })
            .unwrap();
        let up = count_l2(&e, I, 10.0, &Tolerances::default()).unwrap();
        assert_eq!((up.count, up.expected), (0, Some(0)));
        let down = count_l2(&e, -I, 10.0, &Tolerances::default()).unwrap();
        assert_eq!((down.count, down.expected), (1, Some(1)));
    }
}
