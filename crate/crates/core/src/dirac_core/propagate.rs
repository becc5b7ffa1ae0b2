use std::fmt::Write as _;

use log::warn;
use num_complex::Complex64;

use super::expression::DiracExpression;
use super::quadrature::Trajectory;
use crate::linalg;
use crate::ode::{self, IntegrationStats, LinearSystem, Side};
use crate::{CMatrix, Error, Result, Tolerances};

/// Matrix solution `Y(x; λ)` of `J Y' + Q Y = λ Y` sampled on a uniform,
/// strictly increasing grid. `propagate` produces the fundamental matrix
/// with `Y(0) = I`.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    pub lambda: Complex64,
    pub grid: Vec<f64>,
    pub values: Vec<CMatrix>,
    /// `Y'(x_k) = J⁻¹(λ - Q(x_k)) Y(x_k)`, used by the cubic Hermite interpolant.
    pub derivatives: Vec<CMatrix>,
    pub interpolation_order: usize,
    pub stats: IntegrationStats,
    /// Largest condition number of `Y(x_k)` over the grid (square solutions only).
    pub max_condition: f64,
}

/// Fundamental matrix from `Y(0) = I` to `x_end`.
pub fn propagate(
    expr: &DiracExpression,
    lambda: Complex64,
    x_end: f64,
    tol: &Tolerances,
) -> Result<FundamentalSolution> {
    let n = expr.dim();
    propagate_from(expr, lambda, 0.0, CMatrix::identity(n, n), x_end, tol)
}

/// Solution with initial matrix `y0` at `x0`, sampled on a uniform grid up to `x_end`.
pub fn propagate_from(
    expr: &DiracExpression,
    lambda: Complex64,
    x0: f64,
    y0: CMatrix,
    x_end: f64,
    tol: &Tolerances,
) -> Result<FundamentalSolution> {
    let (lo, hi) = expr.interval().window();
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if x_end < lo - slack || x_end > hi + slack || x0 < lo - slack || x0 > hi + slack {
        return Err(Error::InvalidArgument(format!(
            "propagation range [{x0}, {x_end}] leaves the interval [{lo}, {hi}]"
        )));
    }
    if y0.nrows() != expr.dim() {
        return Err(Error::Dimension(format!(
            "initial matrix has {} rows for an n = {} system",
            y0.nrows(),
            expr.dim()
        )));
    }
    let grid = ode::uniform_grid(x0, x_end, tol.output_step);
    let system = expr.system(lambda);
    let mut values = Vec::with_capacity(grid.len());
    let stats = ode::integrate(&system, x0, y0, &grid, tol, |_, _, y| {
        values.push(y.clone())
    })?;

    let (grid, values) = if x_end < x0 {
        (
            grid.into_iter().rev().collect::<Vec<_>>(),
            values.into_iter().rev().collect::<Vec<_>>(),
        )
    } else {
        (grid, values)
    };
    let derivatives = grid
        .iter()
        .zip(&values)
        .map(|(&x, y)| system.coefficient(x, Side::Right) * y)
        .collect();

    let mut max_condition = 1.0_f64;
    if values[0].is_square() {
        for (x, y) in grid.iter().zip(&values) {
            let cond = linalg::condition_number(y);
            if !cond.is_finite() {
                return Err(Error::Integration {
                    x_reached: *x,
                    reason: "fundamental matrix lost invertibility".into(),
                });
            }
            max_condition = max_condition.max(cond);
        }
        if max_condition > tol.condition_warning {
            warn!(
                "fundamental matrix at λ = {lambda} is ill-conditioned (cond up to {max_condition:.3e})"
            );
        }
    }

    Ok(FundamentalSolution {
        lambda,
        grid,
        values,
        derivatives,
        interpolation_order: 3,
        stats,
        max_condition,
    })
}

impl FundamentalSolution {
    pub fn step(&self) -> f64 {
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1).max(1) as f64
    }

    /// Cubic Hermite interpolation between grid points.
    pub fn at(&self, x: f64) -> CMatrix {
        let (y, _) = self.hermite(x);
        y
    }

    fn hermite(&self, x: f64) -> (CMatrix, CMatrix) {
        let m = self.grid.len();
        if m == 1 {
            return (self.values[0].clone(), self.derivatives[0].clone());
        }
        let i = self
            .grid
            .partition_point(|&g| g <= x)
            .saturating_sub(1)
            .min(m - 2);
        let h = self.grid[i + 1] - self.grid[i];
        let t = ((x - self.grid[i]) / h).clamp(0.0, 1.0);
        let (t2, t3) = (t * t, t * t * t);
        let value = &self.values[i] * linalg::re(2.0 * t3 - 3.0 * t2 + 1.0)
            + &self.derivatives[i] * linalg::re((t3 - 2.0 * t2 + t) * h)
            + &self.values[i + 1] * linalg::re(-2.0 * t3 + 3.0 * t2)
            + &self.derivatives[i + 1] * linalg::re((t3 - t2) * h);
        let slope = (&self.values[i] * linalg::re(6.0 * t2 - 6.0 * t)
            + &self.derivatives[i] * linalg::re((3.0 * t2 - 4.0 * t + 1.0) * h)
            + &self.values[i + 1] * linalg::re(-6.0 * t2 + 6.0 * t)
            + &self.derivatives[i + 1] * linalg::re((3.0 * t2 - 2.0 * t) * h))
            / Complex64::new(h, 0.0);
        (value, slope)
    }

    /// Largest relative ODE residual `‖J Y' + Q Y - λ Y‖ / ‖Y‖` of the
    /// interpolant at interval midpoints.
    pub fn ode_residual(&self, expr: &DiracExpression) -> f64 {
        let n = expr.dim();
        let mut worst = 0.0_f64;
        for w in self.grid.windows(2) {
            let x = 0.5 * (w[0] + w[1]);
            let (y, dy) = self.hermite(x);
            let r = expr.apply(x, &y, &dy) - &y * self.lambda;
            let scale = y.norm().max(f64::MIN_POSITIVE) * (1.0 + self.lambda.norm() + n as f64);
            worst = worst.max(r.norm() / scale);
        }
        worst
    }

    pub fn column(&self, j: usize) -> Trajectory {
        Trajectory {
            xs: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|y| y.column(j).into_owned())
                .collect(),
            derivatives: self
                .derivatives
                .iter()
                .map(|y| y.column(j).into_owned())
                .collect(),
        }
    }

    /// Columnar table: `x` followed by `re_ij, im_ij` for every entry, row-major.
    pub fn to_table(&self) -> String {
        let (r, c) = self.values[0].shape();
        let mut out = String::from("x");
        for i in 0..r {
            for j in 0..c {
                let _ = write!(out, ",re_{i}{j},im_{i}{j}");
            }
        }
        out.push('\n');
        for (x, y) in self.grid.iter().zip(&self.values) {
            let _ = write!(out, "{x:.16e}");
            for i in 0..r {
                for j in 0..c {
                    let _ = write!(out, ",{:.16e},{:.16e}", y[(i, j)].re, y[(i, j)].im);
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac_core::{Interval, PotentialSpec, SignatureMatrix};
    use crate::linalg::{c, I};

    fn free(cap: f64) -> DiracExpression {
        DiracExpression::new(
            SignatureMatrix::canonical(1),
            PotentialSpec::zero(2),
            Interval::HalfLine { cap },
        )
        .unwrap()
    }

    #[test]
    fn origin_is_identity() {
        let sol = propagate(&free(5.0), c(0.3, 1.0), 0.0, &Tolerances::default()).unwrap();
        assert_eq!(sol.values.len(), 1);
        assert_eq!(sol.values[0], CMatrix::identity(2, 2));
    }

    #[test]
    fn decaying_column_matches_exponential() {
        let sol = propagate(&free(5.0), I, 1.0, &Tolerances::default()).unwrap();
        let y1 = sol.values.last().unwrap();
        let v = y1 * crate::CVector::from_vec(vec![c(1.0, 0.0), I]);
        let e = (-1.0f64).exp();
        assert!((v[0] - e).norm() < 1e-10 && (v[1] - I * e).norm() < 1e-10);
        assert!(sol.ode_residual(&free(5.0)) < 1e-6);
    }

    #[test]
    fn leaving_the_interval_is_rejected() {
        assert!(propagate(&free(5.0), I, 6.0, &Tolerances::default()).is_err());
    }

    #[test]
    fn table_has_header_and_rows() {
        let tol = Tolerances {
            output_step: 0.5,
            ..Tolerances::default()
        };
        let sol = propagate(&free(5.0), I, 1.0, &tol).unwrap();
        let table = sol.to_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(
            lines[0],
            "x,re_00,im_00,re_01,im_01,re_10,im_10,re_11,im_11"
        );
        assert_eq!(lines.len(), sol.grid.len() + 1);
        assert!(lines[1].starts_with("0.0000000000000000e0,1.0000000000000000e0"));
    }
}
