use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary_algebra::Completion;
use crate::dirac_core::{l2_tail_norm, propagate_from, DiracExpression, Interval, Regime};
use crate::linalg;
use crate::ode::Side;
use crate::{CMatrix, Error, Result, Tolerances};

/// Forward window `[0, length]` split into panels of width `panel`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Window {
    pub length: f64,
    pub panel: f64,
}

impl L2Window {
    /// Window long enough for an `ε = 1e-3` admixture of the growing mode
    /// to dominate the second half, short enough that roundoff does not.
    pub fn for_lambda(lambda: Complex64, alpha: f64, beta: f64) -> Self {
        let rate = Regime::distance(lambda, alpha, beta).max(0.05);
        let length = 10.0 / rate;
        Self {
            length,
            panel: length / 20.0,
        }
    }

    /// Same rule with the rate taken from the frozen coefficient
    /// `J⁻¹(λ - Q(x))` at `x = min(cap, 50)`: the smallest `|Re μ|` over its
    /// eigenvalues. The distance to the strip only bounds that rate from
    /// below, and a window sized by it lets roundoff in the fastest growing
    /// mode swamp the decaying one. Capped at the half-line cap.
    pub fn from_exponents(expr: &DiracExpression, lambda: Complex64) -> Result<Self> {
        let cap = match expr.interval() {
            Interval::HalfLine { cap } => cap,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "L² windows live on the half-line, got {other:?}"
                )))
            }
        };
        let a = expr.coefficient(cap.min(50.0), lambda, Side::Left);
        let rate = linalg::eigenvalues(&a)
            .iter()
            .map(|mu| mu.re.abs())
            .fold(f64::INFINITY, f64::min)
            .max(0.05);
        let length = (10.0 / rate).min(cap);
        Ok(Self {
            length,
            panel: length / 20.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L2Verdict {
    Decaying,
    Growing,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Characterization {
    /// Candidate decays and the perturbed candidate grows.
    pub is_weyl: bool,
    /// False when either test was inconclusive.
    pub decided: bool,
    pub verdict: L2Verdict,
    /// Slope of `log ∫_panel ‖φM + ψ‖²` over the second half of the window.
    pub growth_exponent: f64,
    /// Per-panel ratio `exp(growth_exponent · panel)`.
    pub tail_ratio: f64,
    pub probe_verdict: L2Verdict,
    pub probe_growth_exponent: f64,
    pub window: L2Window,
}

struct Panels {
    exponent: f64,
    ratio: f64,
}

fn panel_growth(
    expr: &DiracExpression,
    lambda: Complex64,
    comp: &Completion,
    m: &CMatrix,
    window: &L2Window,
    tol: &Tolerances,
) -> Result<Panels> {
    let p = comp.p();
    let stacked = linalg::vstack(&CMatrix::identity(p, p), m);
    let u0 = linalg::inverse(&comp.x)? * stacked;
    let sol = propagate_from(expr, lambda, 0.0, u0, window.length, tol)?;
    let count = (window.length / window.panel).round().max(4.0) as usize;
    let width = window.length / count as f64;
    let columns: Vec<_> = (0..p).map(|j| sol.column(j)).collect();
    let mut centers = Vec::with_capacity(count);
    let mut logs = Vec::with_capacity(count);
    for k in 0..count {
        let (a, b) = (k as f64 * width, (k + 1) as f64 * width);
        let mut mass = 0.0;
        for col in &columns {
            mass += l2_tail_norm(col, a, b)?.value;
        }
        centers.push(0.5 * (a + b));
        logs.push(mass.max(f64::MIN_POSITIVE).ln());
    }
    let half = count / 2;
    let xs = &centers[half..];
    let ys = &logs[half..];
    let mean_x = xs.iter().sum::<f64>() / xs.len() as f64;
    let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let exponent = sxy / sxx;
    Ok(Panels {
        exponent,
        ratio: (exponent * width).exp(),
    })
}

fn verdict(ratio: f64, band: f64) -> L2Verdict {
    if ratio < 1.0 - band {
        L2Verdict::Decaying
    } else if ratio > 1.0 + band {
        L2Verdict::Growing
    } else {
        L2Verdict::Indeterminate
    }
}

/// Tests whether `φM + ψ` with `(ψ φ)(0) = X⁻¹` decays on the window, and
/// whether `M + εE` (`E = I/√p`) does not.
pub fn verify_l2_characterization(
    expr: &DiracExpression,
    lambda: Complex64,
    m_candidate: &CMatrix,
    comp: &Completion,
    window: &L2Window,
    tol: &Tolerances,
) -> Result<L2Characterization> {
    let p = comp.p();
    if m_candidate.shape() != (p, p) || expr.dim() != 2 * p {
        return Err(Error::Dimension(format!(
            "M must be {p}x{p} for an n = {} expression",
            expr.dim()
        )));
    }
    if !(window.length > 0.0 && window.panel > 0.0 && window.panel < window.length) {
        return Err(Error::InvalidArgument(format!(
            "invalid L² window {window:?}"
        )));
    }
    let main = panel_growth(expr, lambda, comp, m_candidate, window, tol)?;
    let e = CMatrix::identity(p, p) * linalg::re(1.0 / (p as f64).sqrt());
    let perturbed = m_candidate + e * linalg::re(tol.uniqueness_epsilon);
    let probe = panel_growth(expr, lambda, comp, &perturbed, window, tol)?;

    let main_verdict = verdict(main.ratio, tol.indeterminate_band);
    let probe_verdict = verdict(probe.ratio, tol.indeterminate_band);
    let decided = main_verdict != L2Verdict::Indeterminate
        && !(main_verdict == L2Verdict::Decaying && probe_verdict != L2Verdict::Growing);
    Ok(L2Characterization {
        is_weyl: decided && main_verdict == L2Verdict::Decaying,
        decided,
        verdict: if decided {
            main_verdict
        } else {
            L2Verdict::Indeterminate
        },
        growth_exponent: main.exponent,
        tail_ratio: main.ratio,
        probe_verdict,
        probe_growth_exponent: probe.exponent,
        window: *window,
    })
}
