use serde::{Deserialize, Serialize};

/// Numerical knobs shared by every operation. Operations read their
/// thresholds from here; nothing below the public API hard-codes them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of the embedded Runge–Kutta pair.
    pub rtol: f64,
    /// Absolute tolerance of the embedded Runge–Kutta pair.
    pub atol: f64,
    /// Spacing of the uniform output grid used for dense sampling and Simpson quadrature.
    pub output_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    /// Relative singular-value threshold for kernel dimensions and admissibility.
    pub rank_threshold: f64,
    /// Relative threshold for finite-interval rank tests.
    pub finite_rank_threshold: f64,
    /// Pointwise tolerance used by symmetry classification.
    pub symmetry_tol: f64,
    /// Number of evaluation points used to classify closed-form potentials.
    pub classify_samples: usize,
    /// Largest `‖Q₂‖` still counted as bounded.
    pub bounded_cap: f64,
    /// Condition number above which a boundary matrix counts as singular.
    pub singular_condition: f64,
    /// Condition number above which a fundamental matrix triggers a warning.
    pub condition_warning: f64,
    /// Length of the tail window used for decay ratios.
    pub tail_window: f64,
    /// Fraction of `[0, L]` (from the right) used for growth-exponent regression.
    pub regression_fraction: f64,
    /// Indeterminacy margin as a fraction of the distance from `Im λ` to the strip.
    pub margin_fraction: f64,
    /// Tail ratios inside `[1 - band, 1 + band]` are indeterminate.
    pub indeterminate_band: f64,
    /// Perturbation size of the uniqueness probe in the L² test.
    pub uniqueness_epsilon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            output_step: 0.005,
            min_step: 1e-12,
            max_steps: 5_000_000,
            rank_threshold: 1e-10,
            finite_rank_threshold: 1e-8,
            symmetry_tol: 1e-10,
            classify_samples: 401,
            bounded_cap: 1e8,
            singular_condition: 1e12,
            condition_warning: 1e12,
            tail_window: 1.0,
            regression_fraction: 0.4,
            margin_fraction: 0.1,
            indeterminate_band: 0.05,
            uniqueness_epsilon: 1e-3,
        }
    }
}
