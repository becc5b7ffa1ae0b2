//! Adaptive Dormand–Prince 5(4) integration of linear matrix ODEs
//! `Y' = A(x) Y` with exact landing on output grids and breakpoints.

use num_complex::Complex64;

use crate::{CMatrix, Error, Result, Tolerances};

/// Which one-sided limit to use when the coefficient is evaluated exactly
/// at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A linear first-order system `Y' = A(x) Y`.
pub trait LinearSystem {
    fn dim(&self) -> usize;
    fn coefficient(&self, x: f64, side: Side) -> CMatrix;
    /// Abscissas where `A` may jump; steps never straddle them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Sum of accepted local error estimates (in units of the mixed tolerance).
    pub error_estimate: f64,
}

impl IntegrationStats {
    pub fn absorb(&mut self, other: &IntegrationStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.error_estimate += other.error_estimate;
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct StepResult {
    y: CMatrix,
    err: f64,
}

fn attempt<S: LinearSystem + ?Sized>(
    sys: &S,
    x: f64,
    y: &CMatrix,
    h: f64,
    tol: &Tolerances,
) -> StepResult {
    let forward = if h > 0.0 { Side::Right } else { Side::Left };
    let backward = if h > 0.0 { Side::Left } else { Side::Right };
    let mut k: Vec<CMatrix> = Vec::with_capacity(7);
    for stage in 0..7 {
        let mut arg = y.clone();
        for (j, kj) in k.iter().enumerate() {
            let a = A[stage][j];
            if a != 0.0 {
                arg += kj * Complex64::new(h * a, 0.0);
            }
        }
        let side = if C[stage] < 1.0 { forward } else { backward };
        let coef = sys.coefficient(x + C[stage] * h, side);
        k.push(coef * arg);
    }
    // stage 7 is evaluated at the 5th-order solution (FSAL layout)
    let mut y_new = y.clone();
    for (j, kj) in k.iter().take(6).enumerate() {
        let b = A[6][j];
        if b != 0.0 {
            y_new += kj * Complex64::new(h * b, 0.0);
        }
    }
    let mut err_vec = CMatrix::zeros(y.nrows(), y.ncols());
    for (j, kj) in k.iter().enumerate() {
        if E[j] != 0.0 {
            err_vec += kj * Complex64::new(h * E[j], 0.0);
        }
    }
    let mut acc = 0.0;
    for ((e, a), b) in err_vec.iter().zip(y.iter()).zip(y_new.iter()) {
        let scale = tol.atol + tol.rtol * a.norm().max(b.norm());
        let r = e.norm() / scale;
        acc += r * r;
    }
    let err = (acc / err_vec.len().max(1) as f64).sqrt();
    StepResult { y: y_new, err }
}

/// Integrates `Y' = A(x) Y` from `(x0, y0)` through the monotone `stops`,
/// calling `visit(index, x, &mut Y)` on arrival at each stop. The visitor may
/// replace the state (e.g. re-orthonormalize it); integration continues from
/// the replaced state.
pub fn integrate<S, F>(
    sys: &S,
    x0: f64,
    y0: CMatrix,
    stops: &[f64],
    tol: &Tolerances,
    mut visit: F,
) -> Result<IntegrationStats>
where
    S: LinearSystem + ?Sized,
    F: FnMut(usize, f64, &mut CMatrix),
{
    if y0.nrows() != sys.dim() {
        return Err(Error::Dimension(format!(
            "initial state has {} rows, system has dimension {}",
            y0.nrows(),
            sys.dim()
        )));
    }
    if !(tol.rtol > 0.0 && tol.atol > 0.0) {
        return Err(Error::InvalidArgument(
            "rtol and atol must be positive".into(),
        ));
    }
    let end = stops.last().copied().unwrap_or(x0);
    let dir = if end >= x0 { 1.0 } else { -1.0 };
    let mut prev = x0;
    for &s in stops {
        if (s - prev) * dir < 0.0 || !s.is_finite() {
            return Err(Error::InvalidArgument(
                "stops must be monotone from x0".into(),
            ));
        }
        prev = s;
    }
    let mut breaks: Vec<f64> = sys
        .breakpoints()
        .into_iter()
        .filter(|&b| (b - x0) * dir > 0.0 && (end - b) * dir > 0.0)
        .collect();
    breaks.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    let mut next_break = 0usize;

    let mut stats = IntegrationStats::default();
    let mut x = x0;
    let mut y = y0;
    let norm_a = sys
        .coefficient(x0, if dir > 0.0 { Side::Right } else { Side::Left })
        .norm();
    let mut h = (0.01 / norm_a.max(1.0)).max(tol.min_step * 10.0);

    for (index, &target) in stops.iter().enumerate() {
        while (target - x) * dir > 0.0 {
            while next_break < breaks.len() && (breaks[next_break] - x) * dir <= 0.0 {
                next_break += 1;
            }
            let barrier = match breaks.get(next_break) {
                Some(&b) if (target - b) * dir > 0.0 => b,
                _ => target,
            };
            let distance = (barrier - x).abs();
            let clipped = distance <= h;
            let step = if clipped { distance } else { h };
            let trial = attempt(sys, x, &y, dir * step, tol);
            if !trial.err.is_finite() {
                return Err(Error::Integration {
                    x_reached: x,
                    reason: "non-finite state (blow-up)".into(),
                });
            }
            let factor = if trial.err == 0.0 {
                5.0
            } else {
                (0.9 * trial.err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if trial.err <= 1.0 {
                x = if clipped { barrier } else { x + dir * step };
                y = trial.y;
                stats.accepted += 1;
                stats.error_estimate += trial.err;
                let proposal = step * factor;
                h = if clipped { h.max(proposal) } else { proposal };
            } else {
                stats.rejected += 1;
                h = step * factor.min(0.9);
                if h < tol.min_step {
                    return Err(Error::Integration {
                        x_reached: x,
                        reason: format!("step size underflow (h = {h:.3e})"),
                    });
                }
            }
            if stats.accepted + stats.rejected > tol.max_steps {
                return Err(Error::Integration {
                    x_reached: x,
                    reason: "step budget exhausted".into(),
                });
            }
        }
        visit(index, x, &mut y);
    }
    Ok(stats)
}

/// Uniform grid `x0, x0 + h, …` reaching `x_end` with an even number of
/// intervals (Simpson-ready). The actual spacing never exceeds `max_step`.
pub fn uniform_grid(x0: f64, x_end: f64, max_step: f64) -> Vec<f64> {
    let span = x_end - x0;
    if span == 0.0 {
        return vec![x0];
    }
    let mut intervals = (span.abs() / max_step).ceil().max(2.0) as usize;
    if intervals % 2 == 1 {
        intervals += 1;
    }
    (0..=intervals)
        .map(|k| {
            if k == intervals {
                x_end
            } else {
                x0 + span * k as f64 / intervals as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_matrix};

    struct Constant(CMatrix);
    impl LinearSystem for Constant {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn coefficient(&self, _x: f64, _side: Side) -> CMatrix {
            self.0.clone()
        }
    }

    struct Jump;
    impl LinearSystem for Jump {
        fn dim(&self) -> usize {
            1
        }
        fn coefficient(&self, x: f64, side: Side) -> CMatrix {
            let right = x > 1.0 || (x == 1.0 && side == Side::Right);
            CMatrix::from_element(1, 1, c(if right { -1.0 } else { 1.0 }, 0.0))
        }
        fn breakpoints(&self) -> Vec<f64> {
            vec![1.0]
        }
    }

    #[test]
    fn scalar_exponential() {
        let sys = Constant(CMatrix::from_element(1, 1, c(-1.0, 2.0)));
        let tol = Tolerances::default();
        let mut out = CMatrix::zeros(1, 1);
        integrate(
            &sys,
            0.0,
            CMatrix::identity(1, 1),
            &[3.0],
            &tol,
            |_, _, y| out = y.clone(),
        )
        .unwrap();
        let exact = (c(-1.0, 2.0) * 3.0).exp();
        assert!((out[(0, 0)] - exact).norm() < 1e-9 * exact.norm().max(1e-3));
    }

    #[test]
    fn backward_rotation() {
        let sys = Constant(real_matrix(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let tol = Tolerances::default();
        let mut out = CMatrix::zeros(2, 2);
        integrate(
            &sys,
            0.0,
            CMatrix::identity(2, 2),
            &[-2.0],
            &tol,
            |_, _, y| out = y.clone(),
        )
        .unwrap();
        let (s, co) = (2.0f64).sin_cos();
        let exact = real_matrix(2, 2, &[co, -s, s, co]);
        assert!((out - exact).norm() < 1e-9);
    }

    #[test]
    fn piecewise_coefficient_is_resolved_at_breakpoint() {
        let tol = Tolerances::default();
        let mut out = CMatrix::zeros(1, 1);
        integrate(
            &Jump,
            0.0,
            CMatrix::identity(1, 1),
            &[2.0],
            &tol,
            |_, _, y| out = y.clone(),
        )
        .unwrap();
        // e^{1} · e^{-1}
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-9);
        integrate(
            &Jump,
            2.0,
            CMatrix::identity(1, 1),
            &[0.0],
            &tol,
            |_, _, y| out = y.clone(),
        )
        .unwrap();
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_is_even_and_exact_at_end() {
        let g = uniform_grid(0.0, 1.0, 0.3);
        assert_eq!(g.len() % 2, 1);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g = uniform_grid(0.0, -1.0, 0.25);
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn blow_up_is_reported_with_position() {
        struct Blow;
        impl LinearSystem for Blow {
            fn dim(&self) -> usize {
                1
            }
            fn coefficient(&self, x: f64, _side: Side) -> CMatrix {
                CMatrix::from_element(1, 1, c(1.0 / (1.0 - x).powi(2), 0.0))
            }
        }
        let tol = Tolerances::default();
        let err = integrate(
            &Blow,
            0.0,
            CMatrix::identity(1, 1),
            &[2.0],
            &tol,
            |_, _, _| {},
        )
        .unwrap_err();
        match err {
            Error::Integration { x_reached, .. } => assert!(x_reached < 1.0 && x_reached > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
