use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::boundary_algebra::{
    canonical_frame, complete_pair, AdmissiblePair, Completion, PhiParameter,
};
use crate::dirac_core::{
    DiracExpression, Interpolation, Interval, PotentialSpec, SampledPotential, SignatureMatrix,
};
use crate::linalg::c;
use crate::weyl_engine::TruncationSchedule;
use crate::{CMatrix, Tolerances};

pub const SCHEMA_VERSION: u32 = 1;

/// Row-major nested lists of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixRepr(pub Vec<Vec<[f64; 2]>>);

impl MatrixRepr {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<CMatrix, CliError> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || self.0.iter().any(|r| r.len() != cols) {
            return Err(CliError::Config(
                "matrices must be non-empty and rectangular".into(),
            ));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            c(re, im)
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignatureBlock {
    Canonical { p: usize },
    IDiag { p: usize },
    DiagMinusI { p: usize },
    Explicit { matrix: MatrixRepr },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialBlock {
    Zero,
    Constant {
        q: MatrixRepr,
    },
    ExpDecay {
        base: MatrixRepr,
        rate: f64,
        #[serde(default)]
        center: f64,
    },
    NlsOffdiag {
        q: MatrixRepr,
        rate: f64,
    },
    Sampled {
        xs: Vec<f64>,
        values: Vec<MatrixRepr>,
        #[serde(default)]
        interpolation: Interpolation,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntervalBlock {
    Finite { length: f64 },
    HalfLine { cap: f64 },
    WholeLine { cap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionBlock {
    pub signature: SignatureBlock,
    pub potential: PotentialBlock,
    pub interval: IntervalBlock,
}

/// Boundary condition at 0, either as `Φ` or as the pair `(C₁, C₂)`.
/// Both are read in the canonical frame of `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryBlock {
    Phi { phi: MatrixRepr },
    Pair { c1: MatrixRepr, c2: MatrixRepr },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaGrid {
    List {
        points: Vec<[f64; 2]>,
    },
    /// `counts[0]` points in `re`, `counts[1]` in `im`; imaginary part outermost.
    Rectangle {
        re: [f64; 2],
        im: [f64; 2],
        counts: [usize; 2],
    },
}

impl LambdaGrid {
    pub fn points(&self) -> Vec<Complex64> {
        match self {
            Self::List { points } => points.iter().map(|[re, im]| c(*re, *im)).collect(),
            Self::Rectangle { re, im, counts } => {
                let axis = |range: [f64; 2], n: usize| -> Vec<f64> {
                    if n == 1 {
                        return vec![range[0]];
                    }
                    (0..n)
                        .map(|k| range[0] + (range[1] - range[0]) * k as f64 / (n - 1) as f64)
                        .collect()
                };
                let xs = axis(*re, counts[0]);
                let ys = axis(*im, counts[1]);
                ys.iter()
                    .flat_map(|&y| xs.iter().map(move |&x| c(x, y)))
                    .collect()
            }
        }
    }

    /// `(counts_re, counts_im)` for rectangles.
    pub fn shape(&self) -> Option<(usize, usize)> {
        match self {
            Self::Rectangle { counts, .. } => Some((counts[0], counts[1])),
            Self::List { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsBlock {
    pub dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DefectBlock {
    /// Integration length for L² counts; defaults to `min(cap, 20)`.
    pub length: Option<f64>,
    /// Length of the finite-interval surrogate used by `verify` on half-line scenarios.
    pub finite_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    /// Built-in scenario that fills every block left out.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<ExpressionBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<LambdaGrid>,
    #[serde(default)]
    pub schedule: TruncationSchedule,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub defect: DefectBlock,
    #[serde(default)]
    pub outputs: OutputsBlock,
}

/// A config with every block filled and built into library values.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub config: ScenarioConfig,
    pub expr: DiracExpression,
    pub completion: Completion,
    pub lambdas: Vec<Complex64>,
    pub schedule: TruncationSchedule,
    pub tol: Tolerances,
    pub defect_length: f64,
    pub finite_length: f64,
}

fn real(rows: usize, cols: usize, data: &[f64]) -> MatrixRepr {
    MatrixRepr(
        (0..rows)
            .map(|i| (0..cols).map(|j| [data[i * cols + j], 0.0]).collect())
            .collect(),
    )
}

fn scalar_diag(n: usize, z: [f64; 2]) -> MatrixRepr {
    MatrixRepr(
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { z } else { [0.0, 0.0] })
                    .collect()
            })
            .collect(),
    )
}

fn list(points: &[[f64; 2]]) -> LambdaGrid {
    LambdaGrid::List {
        points: points.to_vec(),
    }
}

fn zero_phi(p: usize) -> BoundaryBlock {
    BoundaryBlock::Phi {
        phi: scalar_diag(p, [0.0, 0.0]),
    }
}

pub const BUILTIN_SCENARIOS: [&str; 9] = [
    "free_dirac_p1",
    "free_dirac_p2",
    "almost_fsa_canonical",
    "almost_fsa_i_diag",
    "almost_fsa_diag_minus_i",
    "constant_nonhermitian",
    "exp_decay_p1",
    "nls_offdiag_p2",
    "hermitian_finite",
];

/// Expression, boundary and grid of a built-in scenario.
pub fn builtin(name: &str) -> Option<(ExpressionBlock, BoundaryBlock, LambdaGrid)> {
    let half = IntervalBlock::HalfLine { cap: 200.0 };
    let almost_fsa = |signature| {
        (
            ExpressionBlock {
                signature,
                potential: PotentialBlock::Constant {
                    q: scalar_diag(2, [0.0, 0.5]),
                },
                interval: half,
            },
            zero_phi(1),
            list(&[[0.0, 2.0], [0.0, -2.0]]),
        )
    };
    let out = match name {
        "free_dirac_p1" => (
            ExpressionBlock {
                signature: SignatureBlock::Canonical { p: 1 },
                potential: PotentialBlock::Zero,
                interval: half,
            },
            zero_phi(1),
            list(&[[0.0, 1.0], [0.0, 2.0], [1.0, 1.0]]),
        ),
        "free_dirac_p2" => (
            ExpressionBlock {
                signature: SignatureBlock::Canonical { p: 2 },
                potential: PotentialBlock::Zero,
                interval: half,
            },
            zero_phi(2),
            list(&[[0.0, 1.0], [0.5, -1.5]]),
        ),
        "almost_fsa_canonical" => almost_fsa(SignatureBlock::Canonical { p: 1 }),
        "almost_fsa_i_diag" => almost_fsa(SignatureBlock::IDiag { p: 1 }),
        "almost_fsa_diag_minus_i" => almost_fsa(SignatureBlock::DiagMinusI { p: 1 }),
        "constant_nonhermitian" => (
            ExpressionBlock {
                signature: SignatureBlock::Canonical { p: 1 },
                potential: PotentialBlock::Constant {
                    q: MatrixRepr(vec![
                        vec![[1.0, 0.2], [0.3, 0.4]],
                        vec![[0.3, 0.1], [-0.5, -0.2]],
                    ]),
                },
                interval: half,
            },
            zero_phi(1),
            list(&[[0.0, 2.0], [1.0, 1.5], [0.0, -2.0]]),
        ),
        "exp_decay_p1" => (
            ExpressionBlock {
                signature: SignatureBlock::Canonical { p: 1 },
                potential: PotentialBlock::ExpDecay {
                    base: MatrixRepr(vec![
                        vec![[1.0, 0.0], [0.5, 0.2]],
                        vec![[0.5, 0.0], [-0.5, 0.0]],
                    ]),
                    rate: 1.0,
                    center: 0.0,
                },
                interval: half,
            },
            zero_phi(1),
            list(&[[0.0, 1.0], [0.5, 2.0], [0.0, -1.5]]),
        ),
        "nls_offdiag_p2" => (
            ExpressionBlock {
                signature: SignatureBlock::IDiag { p: 2 },
                potential: PotentialBlock::NlsOffdiag {
                    q: real(2, 2, &[1.0, 0.3, 0.3, 0.5]),
                    rate: 1.0,
                },
                interval: half,
            },
            zero_phi(2),
            list(&[[0.0, 2.0], [0.0, -2.0]]),
        ),
        "hermitian_finite" => (
            ExpressionBlock {
                signature: SignatureBlock::Canonical { p: 1 },
                potential: PotentialBlock::Constant {
                    q: MatrixRepr(vec![
                        vec![[1.0, 0.0], [0.5, 0.5]],
                        vec![[0.5, -0.5], [-1.0, 0.0]],
                    ]),
                },
                interval: IntervalBlock::Finite { length: 1.0 },
            },
            zero_phi(1),
            list(&[[0.0, 1.0]]),
        ),
        _ => return None,
    };
    Some(out)
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(config_err)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Built-in scenario with default numerics.
    pub fn builtin(name: &str) -> Result<Self, CliError> {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: Some(name.to_string()),
            expression: None,
            boundary: None,
            lambda_grid: None,
            schedule: TruncationSchedule::default(),
            tolerances: Tolerances::default(),
            defect: DefectBlock::default(),
            outputs: OutputsBlock::default(),
        }
        .filled()
    }

    /// Copy with every block present; explicit blocks win over the built-in.
    pub fn filled(&self) -> Result<Self, CliError> {
        let mut out = self.clone();
        if let Some(name) = &self.scenario {
            let (e, b, g) = builtin(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown scenario {name:?}; built-ins are {}",
                    BUILTIN_SCENARIOS.join(", ")
                ))
            })?;
            out.expression.get_or_insert(e);
            out.boundary.get_or_insert(b);
            out.lambda_grid.get_or_insert(g);
        }
        let expr = out
            .expression
            .as_ref()
            .ok_or_else(|| CliError::Config("no expression block and no scenario".into()))?;
        if out.boundary.is_none() {
            let p = match &expr.signature {
                SignatureBlock::Canonical { p }
                | SignatureBlock::IDiag { p }
                | SignatureBlock::DiagMinusI { p } => *p,
                SignatureBlock::Explicit { matrix } => matrix.0.len() / 2,
            };
            out.boundary = Some(zero_phi(p.max(1)));
        }
        if out.lambda_grid.is_none() {
            return Err(CliError::Config(
                "no lambda_grid block and no scenario".into(),
            ));
        }
        Ok(out)
    }

    pub fn resolve(&self) -> Result<Scenario, CliError> {
        let cfg = self.filled()?;
        cfg.schedule.validate().map_err(config_err)?;
        let tol = cfg.tolerances.clone();
        if !(tol.rtol > 0.0 && tol.atol > 0.0 && tol.output_step > 0.0 && tol.rank_threshold > 0.0)
        {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        let expr = build_expression(cfg.expression.as_ref().expect("filled"))?;
        let completion =
            build_completion(cfg.boundary.as_ref().expect("filled"), expr.signature())?;
        let lambdas = cfg.lambda_grid.as_ref().expect("filled").points();
        if lambdas.is_empty() {
            return Err(CliError::Config("the λ grid is empty".into()));
        }
        if lambdas
            .iter()
            .any(|l| !(l.re.is_finite() && l.im.is_finite()))
        {
            return Err(CliError::Config("λ grid points must be finite".into()));
        }
        let window = match expr.interval() {
            Interval::Finite { length } => length,
            Interval::HalfLine { cap } | Interval::WholeLine { cap } => cap,
        };
        let defect_length = cfg.defect.length.unwrap_or(window.min(20.0));
        let finite_length = cfg.defect.finite_length.unwrap_or(window.min(1.0));
        if !(defect_length > 0.0
            && defect_length <= window
            && finite_length > 0.0
            && finite_length <= window)
        {
            return Err(CliError::Config(format!(
                "defect lengths must lie in (0, {window}], got {defect_length} and {finite_length}"
            )));
        }
        Ok(Scenario {
            name: cfg.scenario.clone().unwrap_or_else(|| "custom".into()),
            schedule: cfg.schedule,
            config: cfg,
            expr,
            completion,
            lambdas,
            tol,
            defect_length,
            finite_length,
        })
    }
}

pub fn build_expression(block: &ExpressionBlock) -> Result<DiracExpression, CliError> {
    let signature = match &block.signature {
        SignatureBlock::Canonical { p } if *p > 0 => SignatureMatrix::canonical(*p),
        SignatureBlock::IDiag { p } if *p > 0 => SignatureMatrix::i_diag(*p),
        SignatureBlock::DiagMinusI { p } if *p > 0 => SignatureMatrix::diag_minus_i(*p),
        SignatureBlock::Explicit { matrix } => {
            SignatureMatrix::new(matrix.to_matrix()?).map_err(config_err)?
        }
        _ => return Err(CliError::Config("p must be positive".into())),
    };
    let n = signature.dim();
    let potential = match &block.potential {
        PotentialBlock::Zero => Ok(PotentialSpec::zero(n)),
        PotentialBlock::Constant { q } => PotentialSpec::constant(q.to_matrix()?),
        PotentialBlock::ExpDecay { base, rate, center } => {
            PotentialSpec::exp_decay(base.to_matrix()?, *rate, *center)
        }
        PotentialBlock::NlsOffdiag { q, rate } => PotentialSpec::nls_offdiag(q.to_matrix()?, *rate),
        PotentialBlock::Sampled {
            xs,
            values,
            interpolation,
        } => {
            let values = values
                .iter()
                .map(MatrixRepr::to_matrix)
                .collect::<Result<Vec<_>, _>>()?;
            SampledPotential::new(xs.clone(), values, *interpolation).map(PotentialSpec::Sampled)
        }
    }
    .map_err(config_err)?;
    let interval = match block.interval {
        IntervalBlock::Finite { length } => Interval::Finite { length },
        IntervalBlock::HalfLine { cap } => Interval::HalfLine { cap },
        IntervalBlock::WholeLine { cap } => Interval::WholeLine { cap },
    };
    DiracExpression::new(signature, potential, interval).map_err(config_err)
}

/// Completion for the actual `J`, built in its canonical frame and transported back.
pub fn build_completion(
    block: &BoundaryBlock,
    j: &SignatureMatrix,
) -> Result<Completion, CliError> {
    let p = j.half_dim().ok_or_else(|| {
        CliError::Config(format!(
            "boundary conditions need even n, got n = {}",
            j.dim()
        ))
    })?;
    let frame = canonical_frame(j).map_err(config_err)?;
    let canonical = match block {
        BoundaryBlock::Phi { phi } => {
            let phi = PhiParameter::new(phi.to_matrix()?).map_err(config_err)?;
            if phi.p() != p {
                return Err(CliError::Config(format!(
                    "Φ is {0}x{0} but p = {p}",
                    phi.p()
                )));
            }
            Completion::rotation(&phi)
        }
        BoundaryBlock::Pair { c1, c2 } => {
            let pair =
                AdmissiblePair::new(c1.to_matrix()?, c2.to_matrix()?, 1e-10).map_err(config_err)?;
            if pair.p() != p {
                return Err(CliError::Config(format!(
                    "(C₁, C₂) has p = {} but J needs p = {p}",
                    pair.p()
                )));
            }
            complete_pair(&pair, &SignatureMatrix::canonical(p)).map_err(config_err)?
        }
    };
    Ok(canonical.transported(&frame))
}
