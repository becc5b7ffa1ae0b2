//! Composite Simpson quadrature on uniform grids, L² tail norms and the
//! Lagrange identity residual.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expression::DiracExpression;
use crate::{CMatrix, CVector, Error, Result};

/// A quadrature value with its grid-halving error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// A sampled vector function with derivative access on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub xs: Vec<f64>,
    pub values: Vec<CVector>,
    pub derivatives: Vec<CVector>,
}

impl Trajectory {
    pub fn from_fn(xs: Vec<f64>, f: impl Fn(f64) -> (CVector, CVector)) -> Self {
        let (values, derivatives) = xs.iter().map(|&x| f(x)).unzip();
        Self {
            xs,
            values,
            derivatives,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    fn step(&self) -> f64 {
        if self.xs.len() < 2 {
            0.0
        } else {
            (self.xs[self.xs.len() - 1] - self.xs[0]) / (self.xs.len() - 1) as f64
        }
    }

    /// Index range of grid points covering `[a, b]` (snapped to the grid).
    fn window(&self, a: f64, b: f64) -> Result<(usize, usize)> {
        let (lo, hi) = (self.xs[0], *self.xs.last().expect("non-empty"));
        let h = self.step();
        let slack = 1e-9 * h.max(1e-300);
        if !(a < b) || a < lo - slack || b > hi + slack || self.xs.len() < 2 {
            return Err(Error::WindowOutsideGrid { a, b, lo, hi });
        }
        let ia = ((a - lo) / h).round() as usize;
        let ib = (((b - lo) / h).round() as usize).min(self.xs.len() - 1);
        if ib <= ia {
            return Err(Error::WindowOutsideGrid { a, b, lo, hi });
        }
        Ok((ia, ib))
    }
}

/// Simpson weights for `m + 1` equally spaced points; an odd number of
/// intervals closes with the 3/8 rule on the last three.
fn simpson_weights(points: usize) -> Vec<f64> {
    let mut w = vec![0.0; points];
    let intervals = points.saturating_sub(1);
    match intervals {
        0 => {}
        1 => {
            w[0] = 0.5;
            w[1] = 0.5;
        }
        _ => {
            let simpson_intervals = if intervals.is_multiple_of(2) {
                intervals
            } else {
                intervals - 3
            };
            for k in (0..simpson_intervals).step_by(2) {
                w[k] += 1.0 / 3.0;
                w[k + 1] += 4.0 / 3.0;
                w[k + 2] += 1.0 / 3.0;
            }
            if intervals % 2 == 1 {
                let s = simpson_intervals;
                w[s] += 3.0 / 8.0;
                w[s + 1] += 9.0 / 8.0;
                w[s + 2] += 9.0 / 8.0;
                w[s + 3] += 3.0 / 8.0;
            }
        }
    }
    w
}

/// Composite Simpson of equally spaced samples with spacing `h`.
pub fn simpson<T>(samples: &[T], h: f64) -> T
where
    T: Clone + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let w = simpson_weights(samples.len());
    let mut iter = samples.iter().zip(w.iter());
    let (first, w0) = iter.next().expect("at least one sample");
    let mut acc = first.clone() * (w0 * h);
    for (s, &wk) in iter {
        acc = acc + s.clone() * (wk * h);
    }
    acc
}

/// Simpson value plus the grid-halving error estimate `|S_h - S_2h| / 15`.
pub fn simpson_with_error(samples: &[Complex64], h: f64) -> (Complex64, f64) {
    let fine = simpson(samples, h);
    if samples.len() < 5 {
        return (fine, f64::NAN);
    }
    let coarse_samples: Vec<Complex64> = samples.iter().step_by(2).copied().collect();
    // stride-2 subsampling only covers the full range for an even interval count
    if !(samples.len() - 1).is_multiple_of(2) {
        return (fine, f64::NAN);
    }
    let coarse = simpson(&coarse_samples, 2.0 * h);
    (fine, (fine - coarse).norm() / 15.0)
}

/// Entrywise Simpson of matrix samples, with the largest entrywise error estimate.
pub fn simpson_matrix(samples: &[CMatrix], h: f64) -> (CMatrix, f64) {
    let (r, c) = samples[0].shape();
    let mut out = CMatrix::zeros(r, c);
    let mut err = 0.0_f64;
    let mut column = vec![Complex64::new(0.0, 0.0); samples.len()];
    for i in 0..r {
        for j in 0..c {
            for (k, s) in samples.iter().enumerate() {
                column[k] = s[(i, j)];
            }
            let (v, e) = simpson_with_error(&column, h);
            out[(i, j)] = v;
            if e.is_finite() {
                err = err.max(e);
            }
        }
    }
    (out, err)
}

/// `∫_a^b ‖y(x)‖² dx` of a sampled solution column.
pub fn l2_tail_norm(traj: &Trajectory, a: f64, b: f64) -> Result<Quadrature> {
    let (ia, ib) = traj.window(a, b)?;
    let samples: Vec<Complex64> = traj.values[ia..=ib]
        .iter()
        .map(|v| Complex64::new(v.norm_squared(), 0.0))
        .collect();
    let (value, error) = simpson_with_error(&samples, traj.step());
    Ok(Quadrature {
        value: value.re,
        error,
    })
}

/// Terms of the finite-interval Lagrange identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangeBalance {
    /// `∫₀ᴸ [(D(Q)y, z) - (y, D(Q*)z)] dx`.
    pub integral: Complex64,
    /// `(J y(0), z(0))`.
    pub left: Complex64,
    /// `(J y(L), z(L))`.
    pub right: Complex64,
    /// `integral + left - right`; vanishes up to quadrature error.
    pub residual: Complex64,
    pub quadrature_error: f64,
}

/// Lagrange identity residual for `y` paired with `D(Q)` and `z` paired
/// with `D(Q*)` on the common grid of both trajectories.
pub fn lagrange_residual(
    expr: &DiracExpression,
    y: &Trajectory,
    z: &Trajectory,
) -> Result<LagrangeBalance> {
    let n = expr.dim();
    if y.dim() != n || z.dim() != n {
        return Err(Error::Dimension(format!(
            "trajectories of dimension {} / {} against an expression of dimension {n}",
            y.dim(),
            z.dim()
        )));
    }
    if y.xs.len() != z.xs.len() || y.xs.len() < 3 {
        return Err(Error::Dimension(
            "y and z must share a grid of at least 3 points".into(),
        ));
    }
    if y.xs
        .iter()
        .zip(&z.xs)
        .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(Error::Dimension("y and z must share the same grid".into()));
    }
    let j = expr.signature().matrix();
    let adjoint = expr.adjoint();
    let integrand: Vec<Complex64> = (0..y.xs.len())
        .map(|k| {
            let x = y.xs[k];
            let dy = j * &y.derivatives[k] + expr.potential().at(x) * &y.values[k];
            let dz = j * &z.derivatives[k] + adjoint.potential().at(x) * &z.values[k];
            z.values[k].dotc(&dy) - dz.dotc(&y.values[k])
        })
        .collect();
    let (integral, quadrature_error) = simpson_with_error(&integrand, y.step());
    let last = y.xs.len() - 1;
    let left = z.values[0].dotc(&(j * &y.values[0]));
    let right = z.values[last].dotc(&(j * &y.values[last]));
    Ok(LagrangeBalance {
        integral,
        left,
        right,
        residual: integral + left - right,
        quadrature_error,
    })
}
