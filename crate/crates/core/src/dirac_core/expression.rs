use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::potential::PotentialSpec;
use super::signature::SignatureMatrix;
use crate::ode::{LinearSystem, Side};
use crate::{CMatrix, Error, Result};

/// Where the expression lives. Infinite ends carry a numerical cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interval {
    Finite { length: f64 },
    HalfLine { cap: f64 },
    WholeLine { cap: f64 },
}

impl Interval {
    /// Numerical window `[lo, hi]`.
    pub fn window(&self) -> (f64, f64) {
        match *self {
            Interval::Finite { length } => (0.0, length),
            Interval::HalfLine { cap } => (0.0, cap),
            Interval::WholeLine { cap } => (-cap, cap),
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            Interval::Finite { length } => length,
            Interval::HalfLine { cap } | Interval::WholeLine { cap } => cap,
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "interval extent must be positive, got {v}"
            )));
        }
        Ok(())
    }
}

/// `D(Q) y = J y' + Q(x) y` on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracExpression {
    signature: SignatureMatrix,
    potential: PotentialSpec,
    interval: Interval,
}

impl DiracExpression {
    pub fn new(
        signature: SignatureMatrix,
        potential: PotentialSpec,
        interval: Interval,
    ) -> Result<Self> {
        if signature.dim() != potential.dim() {
            return Err(Error::Dimension(format!(
                "J is {0}x{0} but Q is {1}x{1}",
                signature.dim(),
                potential.dim()
            )));
        }
        interval.validate()?;
        Ok(Self {
            signature,
            potential,
            interval,
        })
    }

    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    pub fn signature(&self) -> &SignatureMatrix {
        &self.signature
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn with_interval(&self, interval: Interval) -> Result<Self> {
        Self::new(self.signature.clone(), self.potential.clone(), interval)
    }

    pub fn with_potential(&self, potential: PotentialSpec) -> Result<Self> {
        Self::new(self.signature.clone(), potential, self.interval)
    }

    /// The formal adjoint expression `D(Q*)`.
    pub fn adjoint(&self) -> Self {
        Self {
            signature: self.signature.clone(),
            potential: PotentialSpec::Adjoint(Box::new(self.potential.clone())),
            interval: self.interval,
        }
    }

    /// The expression seen through the unitary change of variables `y = U ŷ`:
    /// `Ĵ = U*JU`, `Q̂ = U*QU`.
    pub fn in_frame(&self, frame: &CMatrix) -> Result<Self> {
        let n = self.dim();
        if frame.nrows() != n || frame.ncols() != n {
            return Err(Error::Dimension("frame must be n x n".into()));
        }
        if (frame.adjoint() * frame - CMatrix::identity(n, n)).norm() > 1e-12 {
            return Err(Error::InvalidArgument(
                "frame matrix must be unitary".into(),
            ));
        }
        let signature = SignatureMatrix::new(frame.adjoint() * self.signature.matrix() * frame)?;
        Ok(Self {
            signature,
            potential: PotentialSpec::Conjugated {
                inner: Box::new(self.potential.clone()),
                frame: frame.clone(),
            },
            interval: self.interval,
        })
    }

    /// Half-line problem for the negative semi-axis: `w(t) = y(-t)` solves
    /// `(-J) w' + Q(-t) w = λ w` on `t ≥ 0`.
    pub fn mirrored(&self) -> Result<Self> {
        let cap = match self.interval {
            Interval::WholeLine { cap } | Interval::HalfLine { cap } => cap,
            Interval::Finite { length } => length,
        };
        Self::new(
            self.signature.negated(),
            PotentialSpec::Reflected(Box::new(self.potential.clone())),
            Interval::HalfLine { cap },
        )
    }

    /// `J⁻¹(λI - Q(x))`, the coefficient of the explicit form `y' = A(x) y`.
    pub fn coefficient(&self, x: f64, lambda: Complex64, side: Side) -> CMatrix {
        let n = self.dim();
        let shifted = CMatrix::identity(n, n) * lambda - self.potential.eval(x, side);
        self.signature.inverse() * shifted
    }

    pub fn system(&self, lambda: Complex64) -> DiracSystem<'_> {
        DiracSystem { expr: self, lambda }
    }

    /// `D(Q) y` for a value/derivative pair.
    pub fn apply(&self, x: f64, y: &CMatrix, dy: &CMatrix) -> CMatrix {
        self.signature.matrix() * dy + self.potential.at(x) * y
    }
}

/// `y' = J⁻¹(λ - Q(x)) y` at fixed `λ`.
pub struct DiracSystem<'a> {
    expr: &'a DiracExpression,
    lambda: Complex64,
}

impl LinearSystem for DiracSystem<'_> {
    fn dim(&self) -> usize {
        self.expr.dim()
    }

    fn coefficient(&self, x: f64, side: Side) -> CMatrix {
        self.expr.coefficient(x, self.lambda, side)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.expr.potential.breakpoints()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_matrix};

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = DiracExpression::new(
            SignatureMatrix::canonical(1),
            PotentialSpec::zero(4),
            Interval::HalfLine { cap: 10.0 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn frame_change_conjugates_both_parts() {
        let q = CMatrix::from_fn(2, 2, |i, j| c(i as f64 + 0.5, j as f64 - 0.25));
        let e = DiracExpression::new(
            SignatureMatrix::diag_minus_i(1),
            PotentialSpec::constant(q.clone()).unwrap(),
            Interval::HalfLine { cap: 5.0 },
        )
        .unwrap();
        let s = 1.0 / 2f64.sqrt();
        let u = CMatrix::from_row_slice(2, 2, &[c(0.0, s), c(s, 0.0), c(0.0, -s), c(s, 0.0)]);
        let f = e.in_frame(&u).unwrap();
        assert_eq!(
            f.signature().form(),
            super::super::signature::SignatureForm::Canonical
        );
        assert!((f.potential().at(1.0) - u.adjoint() * q * &u).norm() < 1e-14);
    }

    #[test]
    fn mirrored_flips_signature() {
        let e = DiracExpression::new(
            SignatureMatrix::canonical(1),
            PotentialSpec::exp_decay(real_matrix(2, 2, &[1.0, 0.0, 0.0, 2.0]), 1.0, 1.0).unwrap(),
            Interval::WholeLine { cap: 10.0 },
        )
        .unwrap();
        let m = e.mirrored().unwrap();
        assert!((m.signature().matrix() + e.signature().matrix()).norm() < 1e-15);
        assert_eq!(m.potential().at(2.0), e.potential().at(-2.0));
    }
}
