use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::schedule::TruncationSchedule;
use super::solution::{decaying_solution, SolutionSamples};
use crate::dirac_core::{propagate_from, DiracExpression, FundamentalSolution, Interval};
use crate::linalg;
use crate::ode;
use crate::{CMatrix, Error, Result, Tolerances};

/// Profile `x ↦ (∫_{-∞}^x ‖Ψ₋‖²)(∫_x^∞ ‖Ψ₊‖²)` on `[-W, W]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductScan {
    pub grid: Vec<f64>,
    pub profile: Vec<f64>,
    pub sup_estimate: f64,
    pub argmax: f64,
    pub note: String,
}

/// Running integral of `f = ‖Ψ‖²_F` on a uniform increasing grid, with
/// the end corrections that make each panel exact for cubics.
struct Running {
    xs: Vec<f64>,
    f: Vec<f64>,
    df: Vec<f64>,
    /// `∫_{xs[0]}^{x_k} f`.
    from_left: Vec<f64>,
    /// `∫_{x_k}^{xs[last]} f`.
    from_right: Vec<f64>,
}

impl Running {
    fn new(xs: Vec<f64>, values: &[CMatrix], derivatives: &[CMatrix]) -> Self {
        let f: Vec<f64> = values.iter().map(|v| v.norm_squared()).collect();
        let df: Vec<f64> = values
            .iter()
            .zip(derivatives)
            .map(|(v, d)| 2.0 * (v.adjoint() * d).trace().re)
            .collect();
        let m = xs.len();
        let mut panel = vec![0.0; m.saturating_sub(1)];
        for k in 0..m.saturating_sub(1) {
            let h = xs[k + 1] - xs[k];
            panel[k] = 0.5 * h * (f[k] + f[k + 1]) + h * h / 12.0 * (df[k] - df[k + 1]);
        }
        let mut from_left = vec![0.0; m];
        for k in 1..m {
            from_left[k] = from_left[k - 1] + panel[k - 1];
        }
        let mut from_right = vec![0.0; m];
        for k in (0..m.saturating_sub(1)).rev() {
            from_right[k] = from_right[k + 1] + panel[k];
        }
        Self {
            xs,
            f,
            df,
            from_left,
            from_right,
        }
    }

    fn from_solution(sol: &FundamentalSolution) -> Self {
        Self::new(sol.grid.clone(), &sol.values, &sol.derivatives)
    }

    fn from_samples(s: &SolutionSamples) -> Self {
        Self::new(s.grid.clone(), &s.values, &s.derivatives)
    }

    fn total(&self) -> f64 {
        self.from_left[self.from_left.len() - 1]
    }

    /// Hermite interpolation of a running integral `g` with `g' = sign · f`.
    fn interpolate(&self, values: &[f64], sign: f64, x: f64) -> f64 {
        let m = self.xs.len();
        if m == 1 {
            return values[0];
        }
        let i = self
            .xs
            .partition_point(|&g| g <= x)
            .saturating_sub(1)
            .min(m - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let t = ((x - self.xs[i]) / h).clamp(0.0, 1.0);
        let (t2, t3) = (t * t, t * t * t);
        values[i] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + sign * self.f[i] * h * (t3 - 2.0 * t2 + t)
            + values[i + 1] * (-2.0 * t3 + 3.0 * t2)
            + sign * self.f[i + 1] * h * (t3 - t2)
    }

    fn left_at(&self, x: f64) -> f64 {
        self.interpolate(&self.from_left, 1.0, x)
    }

    fn right_at(&self, x: f64) -> f64 {
        self.interpolate(&self.from_right, -1.0, x)
    }

    /// Whether `f` is monotone over the last `count` samples.
    fn monotone_tail(&self, count: usize, increasing: bool) -> bool {
        let start = self.df.len().saturating_sub(count);
        self.f[start..].windows(2).all(|w| {
            if increasing {
                w[1] >= w[0]
            } else {
                w[1] <= w[0]
            }
        })
    }
}

/// Scans the product of the two half-line Weyl masses on `[-W, W]`.
/// `Ψ₊` decays at `+∞`, `Ψ₋` at `-∞`; both are scaled to `‖Ψ±(0)‖_F = 1`.
pub fn whole_line_product_scan(
    expr: &DiracExpression,
    lambda: Complex64,
    sched: &TruncationSchedule,
    half_width: f64,
    tol: &Tolerances,
) -> Result<ProductScan> {
    let cap = match expr.interval() {
        Interval::WholeLine { cap } => cap,
        other => {
            return Err(Error::InvalidArgument(format!(
                "the product scan needs a whole-line expression, got {other:?}"
            )))
        }
    };
    if !(half_width > 0.0 && half_width <= cap) {
        return Err(Error::InvalidArgument(format!(
            "scan half-width {half_width} must lie in (0, {cap}]"
        )));
    }
    let right = expr.with_interval(Interval::HalfLine { cap })?;
    let left = expr.mirrored()?;
    let (plus, plus_ok) = decaying_solution(&right, lambda, sched, tol)?;
    let (minus, minus_ok) = decaying_solution(&left, lambda, sched, tol)?;
    if !(plus_ok && minus_ok) {
        return Err(Error::NotConverged(format!(
            "half-line Weyl solution at λ = {lambda} did not converge (right: {plus_ok}, left: {minus_ok})"
        )));
    }

    let normalize = |s: &SolutionSamples| {
        let scale = linalg::re(1.0 / s.values[0].norm());
        SolutionSamples {
            grid: s.grid.clone(),
            values: s.values.iter().map(|v| v * scale).collect(),
            derivatives: s.derivatives.iter().map(|v| v * scale).collect(),
        }
    };
    let plus = normalize(&plus.samples);
    let minus = normalize(&minus.samples);
    let plus_tail = plus.tail_mass(tol.tail_window);
    let minus_tail = minus.tail_mass(tol.tail_window);

    // continuations across the origin grow in the direction of integration
    let plus_ext = propagate_from(expr, lambda, 0.0, plus.values[0].clone(), -half_width, tol)?;
    let minus_start = minus.values[0].clone();
    let minus_ext = propagate_from(expr, lambda, 0.0, minus_start, half_width, tol)?;

    let plus_half = Running::from_samples(&plus);
    let minus_half = Running::from_samples(&minus);
    let plus_ext = Running::from_solution(&plus_ext);
    let minus_ext = Running::from_solution(&minus_ext);
    let plus_total = plus_half.total() + plus_tail;
    let minus_total = minus_half.total() + minus_tail;

    let grid = ode::uniform_grid(-half_width, half_width, tol.output_step);
    let profile: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let to_left = if x <= 0.0 {
                minus_half.right_at(-x) + minus_tail
            } else {
                minus_total + minus_ext.left_at(x)
            };
            let to_right = if x >= 0.0 {
                plus_half.right_at(x) + plus_tail
            } else {
                plus_total + plus_ext.right_at(x)
            };
            to_left * to_right
        })
        .collect();
    let (imax, &sup) = profile
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let tail_count = ((tol.tail_window / tol.output_step).round() as usize).max(2);
    let note = format!(
        "window [-{half_width}, {half_width}]; edge values {:.6e} / {:.6e}; monotone tails: Ψ₊ {} Ψ₋ {}",
        profile[0],
        profile[profile.len() - 1],
        plus_half.monotone_tail(tail_count, false),
        minus_half.monotone_tail(tail_count, false),
    );
    Ok(ProductScan {
        argmax: grid[imax],
        grid,
        profile,
        sup_estimate: sup,
        note,
    })
}
