use log::debug;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::schedule::TruncationSchedule;
use crate::boundary_algebra::Completion;
use crate::dirac_core::{strip_bounds, DiracExpression, Interval, Regime, Trajectory};
use crate::linalg;
use crate::ode::{self, IntegrationStats, Side};
use crate::{CMatrix, Error, Result, Tolerances};

/// How the decaying subspace was fixed at the truncation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalCondition {
    /// Stable invariant subspace of the frozen coefficient `J⁻¹(λ - Q(L))`.
    Spectral,
    /// `y₂(L) = 0`.
    Fallback,
}

/// `n x p` solution samples on a uniform increasing grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSamples {
    pub grid: Vec<f64>,
    pub values: Vec<CMatrix>,
    pub derivatives: Vec<CMatrix>,
}

impl SolutionSamples {
    pub fn step(&self) -> f64 {
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1).max(1) as f64
    }

    pub fn length(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    pub fn column(&self, j: usize) -> Trajectory {
        Trajectory {
            xs: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|v| v.column(j).into_owned())
                .collect(),
            derivatives: self
                .derivatives
                .iter()
                .map(|v| v.column(j).into_owned())
                .collect(),
        }
    }

    /// Cubic Hermite value inside the grid.
    pub fn at(&self, x: f64) -> CMatrix {
        let m = self.grid.len();
        if m == 1 {
            return self.values[0].clone();
        }
        let i = self
            .grid
            .partition_point(|&g| g <= x)
            .saturating_sub(1)
            .min(m - 2);
        let h = self.grid[i + 1] - self.grid[i];
        let t = ((x - self.grid[i]) / h).clamp(0.0, 1.0);
        let (t2, t3) = (t * t, t * t * t);
        &self.values[i] * linalg::re(2.0 * t3 - 3.0 * t2 + 1.0)
            + &self.derivatives[i] * linalg::re((t3 - 2.0 * t2 + t) * h)
            + &self.values[i + 1] * linalg::re(-2.0 * t3 + 3.0 * t2)
            + &self.derivatives[i + 1] * linalg::re((t3 - t2) * h)
    }

    fn index_near(&self, x: f64) -> usize {
        let h = self.step();
        (((x - self.grid[0]) / h).round().max(0.0) as usize).min(self.grid.len() - 1)
    }

    fn scaled(&self, right: &CMatrix) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * right).collect(),
            derivatives: self.derivatives.iter().map(|v| v * right).collect(),
        }
    }

    /// `‖v(L)‖ / ‖v(L - Δ)‖` (Frobenius norms).
    pub fn tail_ratio(&self, window: f64) -> f64 {
        let last = self.grid.len() - 1;
        let back = self.index_near(self.length() - window);
        if back == last {
            return f64::NAN;
        }
        let (num, den) = (self.values[last].norm(), self.values[back].norm());
        if num == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// `∫₀ᴸ ‖v‖²_F` by Simpson.
    pub fn l2_mass(&self) -> f64 {
        let f: Vec<f64> = self.values.iter().map(|v| v.norm_squared()).collect();
        crate::dirac_core::simpson(&f, self.step())
    }

    /// Exponential extrapolation of `∫_L^∞ ‖v‖²_F` from the tail ratio.
    pub fn tail_mass(&self, window: f64) -> f64 {
        let ratio = self.tail_ratio(window);
        let last = self.values[self.values.len() - 1].norm_squared();
        if last == 0.0 {
            return 0.0;
        }
        if !(ratio < 1.0) {
            return f64::INFINITY;
        }
        let rate = -ratio.ln() / window;
        last / (2.0 * rate)
    }
}

/// Decaying `n x p` solution on `[0, L]` with orthonormal value at 0.
#[derive(Debug, Clone)]
pub(crate) struct DecayingBranch {
    pub samples: SolutionSamples,
    pub terminal: TerminalCondition,
    pub stats: IntegrationStats,
}

/// Integrates the decaying subspace backward from `L` with a QR step at
/// every grid point; the products of the inverted triangular factors give
/// the solution relative to its value at 0 without forming growing modes.
pub(crate) fn decaying_branch(
    expr: &DiracExpression,
    lambda: Complex64,
    length: f64,
    tol: &Tolerances,
) -> Result<DecayingBranch> {
    let n = expr.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "Weyl solutions need n = 2p, got n = {n}"
        )));
    }
    let p = n / 2;
    let a_end = expr.coefficient(length, lambda, Side::Left);
    let (frame, terminal) = match linalg::stable_subspace(&a_end) {
        Ok(s) if s.basis.ncols() == p => (s.basis, TerminalCondition::Spectral),
        _ => (
            linalg::vstack(&CMatrix::identity(p, p), &CMatrix::zeros(p, p)),
            TerminalCondition::Fallback,
        ),
    };

    let grid = ode::uniform_grid(length, 0.0, tol.output_step);
    let system = expr.system(lambda);
    let mut frames = Vec::with_capacity(grid.len());
    let mut factors = Vec::with_capacity(grid.len());
    let stats = ode::integrate(&system, length, frame, &grid, tol, |_, _, y| {
        let (q, r) = linalg::qr_thin(y);
        *y = q.clone();
        frames.push(q);
        factors.push(r);
    })?;

    let last = frames.len() - 1;
    let mut weight = CMatrix::identity(p, p);
    let mut values = vec![CMatrix::zeros(n, p); frames.len()];
    values[last] = frames[last].clone();
    for k in (0..last).rev() {
        weight = factors[k + 1]
            .solve_upper_triangular(&weight)
            .ok_or_else(|| Error::Integration {
                x_reached: grid[k + 1],
                reason: "decaying frame collapsed".into(),
            })?;
        values[k] = &frames[k] * &weight;
    }
    values.reverse();
    let grid: Vec<f64> = grid.into_iter().rev().collect();
    let derivatives = grid
        .iter()
        .zip(&values)
        .map(|(&x, v)| expr.coefficient(x, lambda, Side::Right) * v)
        .collect();
    Ok(DecayingBranch {
        samples: SolutionSamples {
            grid,
            values,
            derivatives,
        },
        terminal,
        stats,
    })
}

/// One truncation length of a schedule run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationStep {
    pub length: f64,
    /// `‖M_L - M_{L_prev}‖`; `None` for the first length.
    pub delta: Option<f64>,
    pub tail_decay_ratio: f64,
}

/// Outcome of a truncated Weyl-solution computation at one `λ`.
#[derive(Debug, Clone)]
pub struct WeylSample {
    pub lambda: Complex64,
    pub regime: Regime,
    /// `Some("unwarranted regime")` for forced strip computations.
    pub label: Option<String>,
    /// Weyl function; `None` unless converged.
    pub m: Option<CMatrix>,
    /// `v(0, λ)`, normalized by `C₁v₁(0) + C₂v₂(0) = I`.
    pub v0: CMatrix,
    pub norm_residual: f64,
    pub tail_decay_ratio: f64,
    pub tail_mass: f64,
    pub converged: bool,
    pub l_used: f64,
    pub terminal: TerminalCondition,
    pub history: Vec<TruncationStep>,
    pub solution: SolutionSamples,
    pub stats: IntegrationStats,
}

impl WeylSample {
    /// The last candidate `M_L`, converged or not.
    pub fn candidate(&self, comp: &Completion, tol: &Tolerances) -> Result<CMatrix> {
        weyl_function_from_boundary(comp, &self.v0, tol)
    }
}

/// `M = (C₃v₁ + C₄v₂)(C₁v₁ + C₂v₂)⁻¹` at `x = 0`.
pub fn weyl_function_from_boundary(
    comp: &Completion,
    v0: &CMatrix,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let p = comp.p();
    if v0.shape() != (2 * p, p) {
        return Err(Error::Dimension(format!(
            "v(0) must be {}x{p}, got {:?}",
            2 * p,
            v0.shape()
        )));
    }
    let image = &comp.x * v0;
    let den = image.rows(0, p).into_owned();
    let num = image.rows(p, p).into_owned();
    let condition = linalg::condition_number(&den);
    if !(condition <= tol.singular_condition) {
        return Err(Error::BoundaryMatrixSingular { condition });
    }
    linalg::right_divide(&num, &den).map_err(|_| Error::BoundaryMatrixSingular { condition })
}

fn half_line_cap(expr: &DiracExpression) -> Result<f64> {
    match expr.interval() {
        Interval::HalfLine { cap } => Ok(cap),
        other => Err(Error::InvalidArgument(format!(
            "Weyl solutions live on the half-line, got {other:?}"
        ))),
    }
}

/// Weyl solution and Weyl function by truncation. In the strip regime the
/// computation runs only when `force` is set, and the sample is labelled.
pub fn weyl_solution(
    expr: &DiracExpression,
    comp: &Completion,
    lambda: Complex64,
    sched: &TruncationSchedule,
    tol: &Tolerances,
    force: bool,
) -> Result<WeylSample> {
    sched.validate()?;
    let cap = half_line_cap(expr)?;
    let n = expr.dim();
    if !n.is_multiple_of(2) || comp.p() * 2 != n {
        return Err(Error::Dimension(format!(
            "completion has p = {} for an n = {n} expression",
            comp.p()
        )));
    }
    let p = n / 2;
    let (alpha, beta) = strip_bounds(expr, tol);
    let regime = Regime::of(lambda, alpha, beta);
    let mut label = None;
    if regime == Regime::Strip {
        if !force {
            return Err(Error::UnwarrantedRegime {
                lambda,
                alpha,
                beta,
            });
        }
        label = Some("unwarranted regime".to_string());
    }

    let [c1, c2, _, _] = comp.x_blocks();
    let top = linalg::hstack(&c1, &c2);
    let mut history = Vec::new();
    let mut previous: Option<CMatrix> = None;
    let mut stats = IntegrationStats::default();
    let mut result = None;

    for length in sched.lengths(cap) {
        let branch = decaying_branch(expr, lambda, length, tol)?;
        stats.absorb(&branch.stats);
        let boundary = &top * &branch.samples.values[0];
        let condition = linalg::condition_number(&boundary);
        if !(condition <= tol.singular_condition) {
            return Err(Error::BoundaryMatrixSingular { condition });
        }
        let normalizer =
            linalg::inverse(&boundary).map_err(|_| Error::BoundaryMatrixSingular { condition })?;
        let samples = branch.samples.scaled(&normalizer);
        let v0 = samples.values[0].clone();
        let m = weyl_function_from_boundary(comp, &v0, tol)?;
        let delta = previous.as_ref().map(|prev| (&m - prev).norm());
        let ratio = samples.tail_ratio(tol.tail_window);
        let tail_mass = samples.tail_mass(tol.tail_window);
        let mass = samples.l2_mass();
        history.push(TruncationStep {
            length,
            delta,
            tail_decay_ratio: ratio,
        });
        debug!("λ = {lambda}: L = {length}, ‖ΔM‖ = {delta:?}, tail ratio = {ratio:.3e}");
        let converged = delta.is_some_and(|d| d < sched.tol * m.norm().max(1.0))
            && ratio < 0.9
            && tail_mass <= sched.tol * mass.max(1.0);
        let norm_residual = (&top * &v0 - CMatrix::identity(p, p)).norm();
        previous = Some(m.clone());
        result = Some((
            samples,
            v0,
            m,
            norm_residual,
            ratio,
            tail_mass,
            length,
            branch.terminal,
        ));
        if converged {
            let (samples, v0, m, norm_residual, ratio, tail_mass, length, terminal) =
                result.take().expect("set above");
            return Ok(WeylSample {
                lambda,
                regime,
                label,
                m: Some(m),
                v0,
                norm_residual,
                tail_decay_ratio: ratio,
                tail_mass,
                converged: true,
                l_used: length,
                terminal,
                history,
                solution: samples,
                stats,
            });
        }
    }

    let (samples, v0, _, norm_residual, ratio, tail_mass, length, terminal) =
        result.expect("schedule has at least one length");
    Ok(WeylSample {
        lambda,
        regime,
        label,
        m: None,
        v0,
        norm_residual,
        tail_decay_ratio: ratio,
        tail_mass,
        converged: false,
        l_used: length,
        terminal,
        history,
        solution: samples,
        stats,
    })
}

/// Decaying subspace on the half-line, converged in principal angle of
/// `v(0)` rather than through a boundary normalization.
pub(crate) fn decaying_solution(
    expr: &DiracExpression,
    lambda: Complex64,
    sched: &TruncationSchedule,
    tol: &Tolerances,
) -> Result<(DecayingBranch, bool)> {
    let cap = half_line_cap(expr)?;
    let mut previous: Option<CMatrix> = None;
    let mut last = None;
    for length in sched.lengths(cap) {
        let branch = decaying_branch(expr, lambda, length, tol)?;
        let v0 = branch.samples.values[0].clone();
        let angle = previous
            .as_ref()
            .map_or(f64::INFINITY, |prev| linalg::max_principal_sine(prev, &v0));
        let ratio = branch.samples.tail_ratio(tol.tail_window);
        let mass = branch.samples.l2_mass();
        let converged = angle < sched.tol
            && ratio < 0.9
            && branch.samples.tail_mass(tol.tail_window) <= sched.tol * mass.max(1.0);
        previous = Some(v0);
        if converged {
            return Ok((branch, true));
        }
        last = Some(branch);
    }
    Ok((last.expect("schedule has at least one length"), false))
}
