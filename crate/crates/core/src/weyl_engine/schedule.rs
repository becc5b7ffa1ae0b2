use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Geometric sequence of truncation lengths `L₀, gL₀, g²L₀, …` capped at `L_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationSchedule {
    pub l0: f64,
    pub growth: f64,
    pub l_max: f64,
    /// Convergence tolerance on `‖M_{L_{k+1}} - M_{L_k}‖`.
    pub tol: f64,
}

impl Default for TruncationSchedule {
    fn default() -> Self {
        Self {
            l0: 5.0,
            growth: 2.0,
            l_max: 80.0,
            tol: 1e-10,
        }
    }
}

impl TruncationSchedule {
    pub fn new(l0: f64, growth: f64, l_max: f64, tol: f64) -> Result<Self> {
        let s = Self {
            l0,
            growth,
            l_max,
            tol,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.l0 > 0.0
            && self.l0.is_finite()
            && self.growth > 1.0
            && self.growth.is_finite()
            && self.l_max >= self.l0
            && self.l_max.is_finite()
            && self.tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid truncation schedule: L₀ = {}, g = {}, L_max = {}, tol = {}",
                self.l0, self.growth, self.l_max, self.tol
            )))
        }
    }

    /// Lengths to try, never beyond `min(L_max, cap)`.
    pub fn lengths(&self, cap: f64) -> Vec<f64> {
        let top = self.l_max.min(cap);
        let mut out = Vec::new();
        let mut l = self.l0;
        while l < top {
            out.push(l);
            l *= self.growth;
        }
        out.push(top);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lengths_double_up_to_cap() {
        let s = TruncationSchedule::default();
        assert_eq!(s.lengths(f64::INFINITY), vec![5.0, 10.0, 20.0, 40.0, 80.0]);
        assert_eq!(s.lengths(30.0), vec![5.0, 10.0, 20.0, 30.0]);
        assert_eq!(s.lengths(3.0), vec![3.0]);
    }

    #[test]
    fn invalid_growth_is_rejected() {
        assert!(TruncationSchedule::new(5.0, 1.0, 80.0, 1e-10).is_err());
        assert!(TruncationSchedule::new(-1.0, 2.0, 80.0, 1e-10).is_err());
    }
}
