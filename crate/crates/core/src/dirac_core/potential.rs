use serde::{Deserialize, Serialize};

use crate::linalg::{self, c, I};
use crate::ode::Side;
use crate::{CMatrix, Error, Result};

/// Interpolation used between samples of a [`SampledPotential`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

/// Matrix potential tabulated on a grid. A repeated abscissa marks a jump:
/// the first copy is the left limit, the second the right limit. Outside the
/// tabulated range the potential is extended by its end values.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    segments: Vec<Segment>,
    interpolation: Interpolation,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    xs: Vec<f64>,
    values: Vec<CMatrix>,
    slopes: Vec<CMatrix>,
}

impl SampledPotential {
    pub fn new(xs: Vec<f64>, values: Vec<CMatrix>, interpolation: Interpolation) -> Result<Self> {
        if xs.len() != values.len() || xs.len() < 2 {
            return Err(Error::InvalidPotential(format!(
                "sampled potential needs matching xs/values with at least 2 points (got {} / {})",
                xs.len(),
                values.len()
            )));
        }
        let dim = values[0].nrows();
        for (x, v) in xs.iter().zip(&values) {
            if v.nrows() != dim || v.ncols() != dim {
                return Err(Error::InvalidPotential(
                    "sample matrices must share one square shape".into(),
                ));
            }
            // L¹_loc is the only requirement; non-finite samples are rejected
            if !x.is_finite() || v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidPotential(format!(
                    "non-finite sample at x = {x}: local singularities are not supported"
                )));
            }
        }
        let mut segments = Vec::new();
        let mut start = 0;
        for k in 1..=xs.len() {
            let split = k == xs.len() || xs[k] <= xs[k - 1];
            if !split {
                continue;
            }
            if k < xs.len() && xs[k] < xs[k - 1] {
                return Err(Error::InvalidPotential(
                    "abscissas must be non-decreasing".into(),
                ));
            }
            if k - start < 2 {
                return Err(Error::InvalidPotential(format!(
                    "segment ending at x = {} has fewer than 2 samples",
                    xs[k - 1]
                )));
            }
            segments.push(Segment::new(
                xs[start..k].to_vec(),
                values[start..k].to_vec(),
            ));
            start = k;
        }
        Ok(Self {
            segments,
            interpolation,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.xs[0]).collect()
    }

    pub fn knots(&self) -> Vec<f64> {
        self.segments
            .iter()
            .flat_map(|s| s.xs.iter().copied())
            .collect()
    }

    pub fn range(&self) -> (f64, f64) {
        let first = &self.segments[0];
        let last = self.segments.last().expect("non-empty");
        (first.xs[0], *last.xs.last().expect("non-empty"))
    }

    pub fn eval(&self, x: f64, side: Side) -> CMatrix {
        let idx = self
            .segments
            .iter()
            .rposition(|s| match side {
                Side::Right => x >= s.xs[0],
                Side::Left => x > s.xs[0],
            })
            .unwrap_or(0);
        self.segments[idx].eval(x, self.interpolation)
    }
}

impl Segment {
    fn new(xs: Vec<f64>, values: Vec<CMatrix>) -> Self {
        let m = xs.len();
        let secant = |i: usize| {
            (&values[i + 1] - &values[i]) / num_complex::Complex64::new(xs[i + 1] - xs[i], 0.0)
        };
        let mut slopes = Vec::with_capacity(m);
        for i in 0..m {
            let s = if i == 0 {
                secant(0)
            } else if i == m - 1 {
                secant(m - 2)
            } else {
                let hl = xs[i] - xs[i - 1];
                let hr = xs[i + 1] - xs[i];
                (secant(i) * c(hl, 0.0) + secant(i - 1) * c(hr, 0.0))
                    / num_complex::Complex64::new(hl + hr, 0.0)
            };
            slopes.push(s);
        }
        Self { xs, values, slopes }
    }

    fn eval(&self, x: f64, interpolation: Interpolation) -> CMatrix {
        let m = self.xs.len();
        if x <= self.xs[0] {
            return self.values[0].clone();
        }
        if x >= self.xs[m - 1] {
            return self.values[m - 1].clone();
        }
        let i = self
            .xs
            .partition_point(|&v| v <= x)
            .saturating_sub(1)
            .min(m - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        match interpolation {
            Interpolation::Linear => {
                &self.values[i] * c(1.0 - t, 0.0) + &self.values[i + 1] * c(t, 0.0)
            }
            Interpolation::Cubic => {
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                &self.values[i] * c(h00, 0.0)
                    + &self.slopes[i] * c(h10 * h, 0.0)
                    + &self.values[i + 1] * c(h01, 0.0)
                    + &self.slopes[i + 1] * c(h11 * h, 0.0)
            }
        }
    }
}

/// Registered potential families plus derived (transformed) potentials.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero {
        n: usize,
    },
    Constant(CMatrix),
    /// `e^{-rate·|x - center|} · base`.
    ExpDecay {
        base: CMatrix,
        rate: f64,
        center: f64,
    },
    /// `i (0, -q(x); -q*(x), 0)` with `q(x) = e^{-rate·|x|} q`.
    NlsOffdiag {
        q: CMatrix,
        rate: f64,
    },
    Sampled(SampledPotential),
    /// `U* Q(x) U`.
    Conjugated {
        inner: Box<PotentialSpec>,
        frame: CMatrix,
    },
    /// `Q(-x)`.
    Reflected(Box<PotentialSpec>),
    /// `Q(x)*`.
    Adjoint(Box<PotentialSpec>),
}

impl PotentialSpec {
    pub fn zero(n: usize) -> Self {
        Self::Zero { n }
    }

    pub fn constant(q: CMatrix) -> Result<Self> {
        check_matrix(&q, "constant")?;
        Ok(Self::Constant(q))
    }

    pub fn exp_decay(base: CMatrix, rate: f64, center: f64) -> Result<Self> {
        check_matrix(&base, "exp_decay")?;
        if !(rate >= 0.0) || !rate.is_finite() || !center.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "exp_decay needs a finite rate >= 0 and finite center (rate = {rate}, center = {center})"
            )));
        }
        Ok(Self::ExpDecay { base, rate, center })
    }

    pub fn nls_offdiag(q: CMatrix, rate: f64) -> Result<Self> {
        check_matrix(&q, "nls_offdiag")?;
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "nls_offdiag needs a finite rate >= 0, got {rate}"
            )));
        }
        Ok(Self::NlsOffdiag { q, rate })
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Zero { .. } => "zero",
            Self::Constant(_) => "constant",
            Self::ExpDecay { .. } => "exp_decay",
            Self::NlsOffdiag { .. } => "nls_offdiag",
            Self::Sampled(_) => "sampled",
            Self::Conjugated { .. } => "conjugated",
            Self::Reflected(_) => "reflected",
            Self::Adjoint(_) => "adjoint",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Zero { n } => *n,
            Self::Constant(q) => q.nrows(),
            Self::ExpDecay { base, .. } => base.nrows(),
            Self::NlsOffdiag { q, .. } => 2 * q.nrows(),
            Self::Sampled(s) => s.dim(),
            Self::Conjugated { frame, .. } => frame.ncols(),
            Self::Reflected(inner) | Self::Adjoint(inner) => inner.dim(),
        }
    }

    pub fn eval(&self, x: f64, side: Side) -> CMatrix {
        match self {
            Self::Zero { n } => CMatrix::zeros(*n, *n),
            Self::Constant(q) => q.clone(),
            Self::ExpDecay { base, rate, center } => {
                base * c((-rate * (x - center).abs()).exp(), 0.0)
            }
            Self::NlsOffdiag { q, rate } => {
                let qx = q * c((-rate * x.abs()).exp(), 0.0);
                let p = q.nrows();
                let zero = CMatrix::zeros(p, p);
                linalg::blocks(&zero, &(-&qx), &(-qx.adjoint()), &zero) * I
            }
            Self::Sampled(s) => s.eval(x, side),
            Self::Conjugated { inner, frame } => frame.adjoint() * inner.eval(x, side) * frame,
            Self::Reflected(inner) => {
                let mirrored = match side {
                    Side::Left => Side::Right,
                    Side::Right => Side::Left,
                };
                inner.eval(-x, mirrored)
            }
            Self::Adjoint(inner) => inner.eval(x, side).adjoint(),
        }
    }

    /// Value away from any breakpoint ambiguity.
    pub fn at(&self, x: f64) -> CMatrix {
        self.eval(x, Side::Right)
    }

    /// Hermitian part `Q₁(x) = (Q + Q*)/2`.
    pub fn q1(&self, x: f64) -> CMatrix {
        linalg::hermitian_part(&self.at(x))
    }

    /// Imaginary part `Q₂(x) = (Q - Q*)/(2i)`.
    pub fn q2(&self, x: f64) -> CMatrix {
        linalg::imaginary_part(&self.at(x))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Sampled(s) => s.breakpoints(),
            Self::Conjugated { inner, .. } | Self::Adjoint(inner) => inner.breakpoints(),
            Self::Reflected(inner) => inner.breakpoints().into_iter().map(|b| -b).collect(),
            Self::ExpDecay { center, rate, .. } if *rate > 0.0 => vec![*center],
            Self::NlsOffdiag { rate, .. } if *rate > 0.0 => vec![0.0],
            _ => Vec::new(),
        }
    }

    /// Points carrying extra structure that classification must look at
    /// (knots, kinks, jumps) inside `[lo, hi]`.
    pub fn special_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = match self {
            Self::Sampled(s) => s.knots(),
            Self::Conjugated { inner, .. } | Self::Adjoint(inner) => inner.special_points(lo, hi),
            Self::Reflected(inner) => inner
                .special_points(-hi, -lo)
                .into_iter()
                .map(|b| -b)
                .collect(),
            _ => self.breakpoints(),
        };
        pts.retain(|&x| x >= lo && x <= hi);
        pts
    }

    pub fn is_closed_form(&self) -> bool {
        match self {
            Self::Sampled(_) => false,
            Self::Conjugated { inner, .. } | Self::Reflected(inner) | Self::Adjoint(inner) => {
                inner.is_closed_form()
            }
            _ => true,
        }
    }

    /// Evaluation points on `[lo, hi]`: a uniform sweep plus special points.
    pub fn sample_points(&self, lo: f64, hi: f64, count: usize) -> Vec<f64> {
        let count = count.max(2);
        let mut pts: Vec<f64> = (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect();
        pts.extend(self.special_points(lo, hi));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Lower and upper bounds `(α_Q, β_Q)` of `Q₂` over the sampled points.
    pub fn imaginary_bounds(&self, points: &[f64]) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &x in points {
            for side in [Side::Left, Side::Right] {
                let q2 = linalg::imaginary_part(&self.eval(x, side));
                let (vals, _) = linalg::hermitian_eigen(&q2);
                if let (Some(&a), Some(&b)) = (vals.first(), vals.last()) {
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
            }
        }
        (lo, hi)
    }
}

fn check_matrix(q: &CMatrix, family: &str) -> Result<()> {
    if q.nrows() != q.ncols() || q.nrows() == 0 {
        return Err(Error::InvalidPotential(format!(
            "{family}: matrix must be square and non-empty"
        )));
    }
    if q.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidPotential(format!(
            "{family}: non-finite entry"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_matrix};

    #[test]
    fn q1_q2_are_hermitian_and_recombine() {
        let q = CMatrix::from_fn(3, 3, |i, j| {
            c((i * 3 + j) as f64 * 0.1, (j as f64 - i as f64) * 0.7 + 0.2)
        });
        let spec = PotentialSpec::constant(q.clone()).unwrap();
        let (q1, q2) = (spec.q1(0.3), spec.q2(0.3));
        assert!((&q1 - q1.adjoint()).norm() < 1e-14);
        assert!((&q2 - q2.adjoint()).norm() < 1e-14);
        assert!((q1 + q2 * I - q).norm() < 1e-14);
    }

    #[test]
    fn nls_offdiag_shape() {
        let spec = PotentialSpec::nls_offdiag(real_matrix(1, 1, &[2.0]), 1.0).unwrap();
        let q = spec.at(0.0);
        assert_eq!(q[(0, 1)], c(0.0, -2.0));
        assert_eq!(q[(1, 0)], c(0.0, -2.0));
        assert_eq!(q[(0, 0)], c(0.0, 0.0));
        let decayed = spec.at(1.0);
        assert!((decayed[(0, 1)].im + 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn sampled_cubic_reproduces_quadratics() {
        let xs: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let vals = xs.iter().map(|&x| real_matrix(1, 1, &[x * x])).collect();
        let s = SampledPotential::new(xs, vals, Interpolation::Cubic).unwrap();
        // interior slopes of the three-point rule are exact for quadratics
        let v = s.eval(0.45, Side::Right)[(0, 0)].re;
        assert!((v - 0.2025).abs() < 1e-12);
    }

    #[test]
    fn sampled_jump_respects_sides() {
        let xs = vec![0.0, 1.0, 1.0, 2.0];
        let vals = vec![
            real_matrix(1, 1, &[1.0]),
            real_matrix(1, 1, &[1.0]),
            real_matrix(1, 1, &[-1.0]),
            real_matrix(1, 1, &[-1.0]),
        ];
        let s = SampledPotential::new(xs, vals, Interpolation::Linear).unwrap();
        assert_eq!(s.breakpoints(), vec![1.0]);
        assert_eq!(s.eval(1.0, Side::Left)[(0, 0)].re, 1.0);
        assert_eq!(s.eval(1.0, Side::Right)[(0, 0)].re, -1.0);
        assert_eq!(s.eval(5.0, Side::Right)[(0, 0)].re, -1.0);
    }

    #[test]
    fn rejects_singular_samples() {
        let xs = vec![0.0, 1.0];
        let vals = vec![
            real_matrix(1, 1, &[1.0]),
            real_matrix(1, 1, &[f64::INFINITY]),
        ];
        assert!(matches!(
            SampledPotential::new(xs, vals, Interpolation::Cubic),
            Err(Error::InvalidPotential(_))
        ));
        assert!(PotentialSpec::exp_decay(real_matrix(1, 1, &[1.0]), -1.0, 0.0).is_err());
    }

    #[test]
    fn derived_potentials() {
        let base =
            PotentialSpec::exp_decay(CMatrix::from_element(2, 2, c(1.0, 1.0)), 1.0, 0.5).unwrap();
        let refl = PotentialSpec::Reflected(Box::new(base.clone()));
        assert_eq!(refl.at(-0.7), base.at(0.7));
        let adj = PotentialSpec::Adjoint(Box::new(base.clone()));
        assert_eq!(adj.at(0.2), base.at(0.2).adjoint());
        assert_eq!(refl.breakpoints(), vec![-0.5]);
    }
}
