use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary_algebra::{theta_cross, BoundarySubspace};
use crate::dirac_core::{classify, propagate, simpson, DiracExpression, Interval, SignatureMatrix};
use crate::linalg::{self, I};
use crate::ode::{self, LinearSystem, Side};
use crate::{CMatrix, CVector, Error, Result, Tolerances};

fn finite_length(expr: &DiracExpression) -> Result<f64> {
    match expr.interval() {
        Interval::Finite { length } => Ok(length),
        other => Err(Error::InvalidArgument(format!(
            "finite-interval checks need a finite interval, got {other:?}"
        ))),
    }
}

/// `D(Q) D(Q*) y = -y` as the first-order system for `(y, z = D(Q*) y)`:
/// `y' = J⁻¹(z - Q* y)`, `z' = J⁻¹(-y - Q z)`.
struct KernelSystem<'a> {
    expr: &'a DiracExpression,
}

impl LinearSystem for KernelSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.expr.dim()
    }

    fn coefficient(&self, x: f64, side: Side) -> CMatrix {
        let j_inv = self.expr.signature().inverse();
        let q = self.expr.potential().eval(x, side);
        linalg::blocks(
            &(-(&j_inv * q.adjoint())),
            &j_inv,
            &(-&j_inv),
            &(-(&j_inv * q)),
        )
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.expr.potential().breakpoints()
    }
}

/// Solution space of `D(Q) D(Q*) y = -y` on `[0, L]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDimension {
    pub dimension: usize,
    pub length_used: f64,
    pub singular_values: Vec<f64>,
    /// Some singular value sat within a factor 100 of the threshold.
    pub ambiguous: bool,
    pub retried: bool,
}

/// Kernel basis sampled on a uniform grid: column `k` of `values[i]` is
/// `(g_k, D(Q*) g_k)` at `grid[i]`.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub grid: Vec<f64>,
    pub values: Vec<CMatrix>,
    pub derivatives: Vec<CMatrix>,
}

impl KernelBasis {
    /// Cubic Hermite value of the basis inside the grid.
    pub fn at(&self, x: f64) -> CMatrix {
        let m = self.grid.len();
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

    /// The combination `Σ c_k column_k` at `x`, split into `(g, D(Q*) g)`.
    pub fn element_at(&self, x: f64, coefficients: &CVector) -> (CVector, CVector) {
        let n = self.values[0].nrows() / 2;
        let w = self.at(x) * coefficients;
        (w.rows(0, n).into_owned(), w.rows(n, n).into_owned())
    }
}

pub fn kernel_basis(expr: &DiracExpression, tol: &Tolerances) -> Result<KernelBasis> {
    let length = finite_length(expr)?;
    let grid = ode::uniform_grid(0.0, length, tol.output_step);
    let sys = KernelSystem { expr };
    let n2 = sys.dim();
    let mut values = Vec::with_capacity(grid.len());
    let mut derivatives = Vec::with_capacity(grid.len());
    let last = grid.len() - 1;
    ode::integrate(
        &sys,
        0.0,
        CMatrix::identity(n2, n2),
        &grid,
        tol,
        |i, x, y| {
            let side = if i == last { Side::Left } else { Side::Right };
            derivatives.push(sys.coefficient(x, side) * &*y);
            values.push(y.clone());
        },
    )?;
    Ok(KernelBasis {
        grid,
        values,
        derivatives,
    })
}

fn kernel_rank(
    expr: &DiracExpression,
    length: f64,
    tol: &Tolerances,
) -> Result<(usize, Vec<f64>, bool)> {
    let sys = KernelSystem { expr };
    let n2 = sys.dim();
    let mut end = CMatrix::identity(n2, n2);
    ode::integrate(&sys, 0.0, end.clone(), &[length], tol, |_, _, y| {
        end = y.clone()
    })?;
    let s = linalg::singular_values(&end);
    let top = s[0];
    let thr = tol.finite_rank_threshold * top;
    let rank = s.iter().filter(|&&v| v > thr).count();
    let ambiguous = s.iter().any(|&v| v > thr / 100.0 && v < thr * 100.0);
    Ok((rank, s, ambiguous))
}

/// `dim ker(I + B*A*)` through the rank of the fundamental matrix of the
/// equivalent `2n` system at `L`; an ambiguous rank is retried at `1.01 L`.
pub fn finite_interval_kernel(expr: &DiracExpression, tol: &Tolerances) -> Result<KernelDimension> {
    let length = finite_length(expr)?;
    let (rank, s, ambiguous) = kernel_rank(expr, length, tol)?;
    if !ambiguous {
        return Ok(KernelDimension {
            dimension: rank,
            length_used: length,
            singular_values: s,
            ambiguous: false,
            retried: false,
        });
    }
    warn!("kernel rank at L = {length} is ambiguous; retrying at 1.01 L");
    let longer = expr.with_interval(Interval::Finite {
        length: 1.01 * length,
    })?;
    let (rank, s, ambiguous) = kernel_rank(&longer, 1.01 * length, tol)?;
    Ok(KernelDimension {
        dimension: rank,
        length_used: 1.01 * length,
        singular_values: s,
        ambiguous,
        retried: true,
    })
}

/// `f(x) = φ((2x - a - b)/(b - a)) · e` with `φ(t) = exp(-1/(1 - t²))` on `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub a: f64,
    pub b: f64,
    pub vector: CVector,
}

impl Bump {
    /// Value and derivative at `x`.
    pub fn eval(&self, x: f64) -> (CVector, CVector) {
        let n = self.vector.len();
        if x <= self.a || x >= self.b {
            return (CVector::zeros(n), CVector::zeros(n));
        }
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let s = 1.0 - t * t;
        let phi = (-1.0 / s).exp();
        let dphi = phi * (-2.0 * t / (s * s)) * 2.0 / (self.b - self.a);
        (
            &self.vector * linalg::re(phi),
            &self.vector * linalg::re(dphi),
        )
    }
}

/// `|(f, g) + (D(Q*) f, D(Q*) g)|` for a kernel element `g` and a bump `f`
/// supported strictly inside `(0, L)`. The integral runs over the support of
/// `f` on a grid 16 times finer than the basis grid, since the bump has
/// large high derivatives.
pub fn graph_orthogonality_probe(
    expr: &DiracExpression,
    basis: &KernelBasis,
    coefficients: &CVector,
    f: &Bump,
) -> Result<f64> {
    let length = finite_length(expr)?;
    if !(f.a > 0.0 && f.b < length && f.a < f.b) {
        return Err(Error::SupportViolation {
            a: f.a,
            b: f.b,
            length,
        });
    }
    if f.vector.len() != expr.dim() || coefficients.len() != 2 * expr.dim() {
        return Err(Error::Dimension(
            "bump vector or coefficients have the wrong length".into(),
        ));
    }
    let j = expr.signature().matrix();
    let fine = (basis.grid[1] - basis.grid[0]) / 16.0;
    let xs = ode::uniform_grid(f.a, f.b, fine);
    let integrand: Vec<Complex64> = xs
        .iter()
        .map(|&x| {
            let (g, dg) = basis.element_at(x, coefficients);
            let (fv, fd) = f.eval(x);
            let af = j * fd + expr.potential().at(x).adjoint() * &fv;
            g.dotc(&fv) + dg.dotc(&af)
        })
        .collect();
    Ok(simpson(&integrand, xs[1] - xs[0]).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VonNeumannCheck {
    pub rank: usize,
    pub pass: bool,
    pub singular_values: Vec<f64>,
}

/// Rank of the stacked boundary traces `(y(0), y(L))` of the `n` solutions
/// at `λ = i` and the `n` at `λ = -i`; must be `2n`.
pub fn von_neumann_dimension_check(
    expr: &DiracExpression,
    tol: &Tolerances,
) -> Result<VonNeumannCheck> {
    let length = finite_length(expr)?;
    let report = classify(expr, tol);
    if !report.formally_selfadjoint {
        return Err(Error::NotFormallySelfadjoint(report.max_q2_norm));
    }
    let n = expr.dim();
    let up = propagate(expr, I, length, tol)?;
    let down = propagate(expr, -I, length, tol)?;
    let id = CMatrix::identity(n, n);
    let traces = linalg::blocks(
        &id,
        &id,
        up.values.last().expect("grid"),
        down.values.last().expect("grid"),
    );
    let s = linalg::singular_values(&traces);
    let rank = linalg::rank(&traces, tol.finite_rank_threshold);
    Ok(VonNeumannCheck {
        rank,
        pass: rank == 2 * n,
        singular_values: s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiDims {
    pub dim_theta: usize,
    pub dim_cross: usize,
    pub quasi: bool,
}

/// `(dim θ, dim θ^×)` and whether both equal `n/2`.
pub fn quasi_selfadjoint_dims(theta: &BoundarySubspace, j: &SignatureMatrix) -> Result<QuasiDims> {
    let cross = theta_cross(theta, j)?;
    let n = j.dim();
    Ok(QuasiDims {
        dim_theta: theta.dim(),
        dim_cross: cross.dim(),
        quasi: n.is_multiple_of(2) && theta.dim() == n / 2 && cross.dim() == n / 2,
    })
}

/// Dimension bookkeeping on `[0, L]`, where every solution is square integrable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteIntervalCheck {
    pub length: f64,
    pub n: usize,
    /// `dim ker(I + B*A*)` for `D(Q)`.
    pub kernel_dim: usize,
    /// The same for the adjoint expression `D(Q*)`.
    pub kernel_dim_adjoint: usize,
    /// Rank of the stacked boundary traces (formally selfadjoint only).
    pub trace_rank: Option<usize>,
    /// `dim N_λ̄(A) + dim N_λ(B)`.
    pub defect_sum: usize,
    pub lambda: Complex64,
}

impl FiniteIntervalCheck {
    pub fn pass(&self) -> bool {
        let two_n = 2 * self.n;
        self.kernel_dim == two_n
            && self.kernel_dim_adjoint == two_n
            && self.defect_sum == two_n
            && self.trace_rank.is_none_or(|r| r == two_n)
    }
}

pub fn finite_interval_check(
    expr: &DiracExpression,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<FiniteIntervalCheck> {
    let length = finite_length(expr)?;
    let kernel = finite_interval_kernel(expr, tol)?;
    let kernel_adjoint = finite_interval_kernel(&expr.adjoint(), tol)?;
    let trace_rank = match von_neumann_dimension_check(expr, tol) {
        Ok(check) => Some(check.rank),
        Err(Error::NotFormallySelfadjoint(_)) => None,
        Err(e) => return Err(e),
    };
    let a_side = propagate(&expr.adjoint(), lambda.conj(), length, tol)?;
    let b_side = propagate(expr, lambda, length, tol)?;
    let solution_rank = |m: &CMatrix| linalg::rank(m, tol.finite_rank_threshold);
    let defect_sum = solution_rank(a_side.values.last().expect("grid"))
        + solution_rank(b_side.values.last().expect("grid"));
    Ok(FiniteIntervalCheck {
        length,
        n: expr.dim(),
        kernel_dim: kernel.dimension,
        kernel_dim_adjoint: kernel_adjoint.dimension,
        trace_rank,
        defect_sum,
        lambda,
    })
}
