use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{MatrixRepr, OutputFormat, Scenario, ScenarioConfig};
use super::output::{self, REPORT_SCHEMA};
use super::verify::{verify_suite, Status, SuiteVerdict};
use super::{CliError, Command, RunOptions, EXIT_INVARIANT_FAIL, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::boundary_algebra::Completion;
use crate::defect_lab::{count_l2, finite_interval_check, FiniteIntervalCheck};
use crate::dirac_core::{
    classify, kappa, strip_bounds, DiracExpression, Interval, Regime, SymmetryReport,
};
use crate::linalg::{self, I};
use crate::weyl_engine::{
    cayley, herglotz_residuals, weyl_solution, TerminalCondition, TruncationSchedule,
    TruncationStep, WeylSample,
};
use crate::{Error, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Converged,
    NotConverged,
    /// Strip-regime λ without `--force`.
    Refused,
    /// Strip-regime λ left out of a sweep.
    Skipped,
    Failed,
}

/// One row of `msamples.csv` plus the detail that only goes to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub lambda: [f64; 2],
    pub regime: Regime,
    pub status: SampleStatus,
    pub label: Option<String>,
    pub m: Option<MatrixRepr>,
    pub norm_residual: Option<f64>,
    pub eq339: Option<f64>,
    pub eq340: Option<f64>,
    pub companion: Option<[f64; 2]>,
    pub schur_norm: Option<f64>,
    pub converged: bool,
    pub l_used: Option<f64>,
    pub terminal: Option<TerminalCondition>,
    pub history: Vec<TruncationStep>,
    pub message: Option<String>,
}

impl SampleRecord {
    fn bare(lambda: Complex64, regime: Regime, status: SampleStatus, message: String) -> Self {
        Self {
            lambda: [lambda.re, lambda.im],
            regime,
            status,
            label: None,
            m: None,
            norm_residual: None,
            eq339: None,
            eq340: None,
            companion: None,
            schur_norm: None,
            converged: false,
            l_used: None,
            terminal: None,
            history: Vec::new(),
            message: Some(message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRecord {
    pub lambda: [f64; 2],
    pub regime: Regime,
    pub count: usize,
    pub expected: Option<usize>,
    pub expected_source: Option<String>,
    pub indeterminate: bool,
    pub offending_exponent: Option<f64>,
    pub margin: f64,
    pub exponents: Vec<f64>,
    pub length: f64,
    /// `PASS`, `FAIL`, or `-` when theory predicts nothing.
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteRecord {
    pub check: FiniteIntervalCheck,
    pub verdict: String,
}

/// `‖∂ₓM + i ∂ᵧM‖ / max(1, ‖M‖)` by central differences on a rectangle grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyRiemannPoint {
    pub lambda: [f64; 2],
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionEcho {
    pub x: MatrixRepr,
    pub y: MatrixRepr,
    /// `‖Y*ĴX - J‖`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub subcommand: String,
    pub scenario: String,
    pub force: bool,
    /// The config with every block filled in; re-running it reproduces this report.
    pub config: ScenarioConfig,
    pub completion: CompletionEcho,
    pub symmetry: SymmetryReport,
    pub kappa: [usize; 2],
    pub strip: [f64; 2],
    pub samples: Vec<SampleRecord>,
    pub defects: Vec<DefectRecord>,
    pub finite: Vec<FiniteRecord>,
    pub verdicts: Vec<SuiteVerdict>,
    pub cauchy_riemann: Vec<CauchyRiemannPoint>,
    pub exit_code: i32,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: RunReport,
    pub out_dir: PathBuf,
    /// Human-readable summary for standard output.
    pub summary: String,
}

/// Reads the config at `path`, runs `command` and writes the artifacts.
pub fn run(
    command: Command,
    config_path: &Path,
    opts: &RunOptions,
) -> Result<RunOutcome, CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg = ScenarioConfig::from_json(&text)?;
    run_scenario(command, &cfg, opts)
}

pub fn run_scenario(
    command: Command,
    cfg: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<RunOutcome, CliError> {
    let scenario = cfg.resolve()?;
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| scenario.config.outputs.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let format = opts
        .format
        .or(scenario.config.outputs.format)
        .unwrap_or_default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    info!(
        "{} on scenario {} ({} λ values)",
        command.as_str(),
        scenario.name,
        scenario.lambdas.len()
    );
    let mut report = pool.install(|| execute(command, &scenario, opts.force))?;
    report.exit_code = exit_code(command, &report);

    let p = scenario.expr.dim() / 2;
    if format == OutputFormat::Csv {
        if matches!(command, Command::Weyl | Command::Sweep | Command::Verify)
            && !report.samples.is_empty()
        {
            output::write_file(
                &out_dir,
                "msamples.csv",
                &output::msamples_csv(p, &report.samples),
            )?;
        }
        if !report.defects.is_empty() {
            output::write_file(
                &out_dir,
                "defects.csv",
                &output::defects_csv(scenario.expr.dim(), &report.defects),
            )?;
        } else if !report.finite.is_empty() {
            output::write_file(&out_dir, "defects.csv", &output::finite_csv(&report.finite))?;
        }
    }
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?;
    output::write_file(&out_dir, "report.json", &(json + "\n"))?;
    let summary = summarize(command, &report);
    Ok(RunOutcome {
        exit_code: report.exit_code,
        report,
        out_dir,
        summary,
    })
}

fn exit_code(command: Command, report: &RunReport) -> i32 {
    if command == Command::Verify {
        return if report.verdicts.iter().any(|v| v.status == Status::Fail) {
            EXIT_INVARIANT_FAIL
        } else {
            EXIT_OK
        };
    }
    let bad = report.samples.iter().any(|s| {
        matches!(
            s.status,
            SampleStatus::NotConverged | SampleStatus::Refused | SampleStatus::Failed
        )
    });
    if bad {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    }
}

fn execute(command: Command, sc: &Scenario, force: bool) -> Result<RunReport, CliError> {
    let symmetry = classify(&sc.expr, &sc.tol);
    let (kp, km) = kappa(sc.expr.signature(), sc.tol.rank_threshold);
    let (alpha, beta) = strip_bounds(&sc.expr, &sc.tol);
    let mut report = RunReport {
        schema: REPORT_SCHEMA.to_string(),
        subcommand: command.as_str().to_string(),
        scenario: sc.name.clone(),
        force,
        config: sc.config.clone(),
        completion: CompletionEcho {
            x: MatrixRepr::from_matrix(&sc.completion.x),
            y: MatrixRepr::from_matrix(&sc.completion.y),
            residual: sc.completion.residual(sc.expr.signature()),
        },
        symmetry,
        kappa: [kp, km],
        strip: [alpha, beta],
        samples: Vec::new(),
        defects: Vec::new(),
        finite: Vec::new(),
        verdicts: Vec::new(),
        cauchy_riemann: Vec::new(),
        exit_code: EXIT_OK,
    };
    match command {
        Command::Classify => {}
        Command::Weyl | Command::Sweep => {
            require_half_line(&sc.expr, command)?;
            let skip_strip = command == Command::Sweep;
            let results = weyl_records(sc, force, skip_strip);
            report.samples = results.into_iter().map(|(r, _)| r).collect();
            if command == Command::Sweep {
                report.cauchy_riemann = cauchy_riemann(sc, &report.samples);
            }
        }
        Command::Defect => match sc.expr.interval() {
            Interval::HalfLine { .. } => report.defects = defect_records(sc)?,
            Interval::Finite { .. } => report.finite = finite_records(sc)?,
            Interval::WholeLine { .. } => {
                return Err(CliError::Config(
                    "defect counts need a half-line or finite interval".into(),
                ))
            }
        },
        Command::Verify => {
            let results = match sc.expr.interval() {
                Interval::HalfLine { .. } => weyl_records(sc, force, false),
                _ => Vec::new(),
            };
            if let Interval::HalfLine { .. } = sc.expr.interval() {
                report.defects = defect_records(sc)?;
            }
            report.verdicts = verify_suite(sc, &report.symmetry, &results, &report.defects);
            report.samples = results.into_iter().map(|(r, _)| r).collect();
        }
    }
    Ok(report)
}

fn require_half_line(expr: &DiracExpression, command: Command) -> Result<(), CliError> {
    match expr.interval() {
        Interval::HalfLine { .. } => Ok(()),
        other => Err(CliError::Config(format!(
            "{} needs a half-line expression, got {other:?}",
            command.as_str()
        ))),
    }
}

/// Companion point for the cross identity: half a unit further from the real axis.
pub(crate) fn companion(lambda: Complex64) -> Complex64 {
    let s = if lambda.im < 0.0 { -1.0 } else { 1.0 };
    lambda + I * (0.5 * s)
}

/// Weyl samples over the grid, in grid order.
pub(crate) fn weyl_records(
    sc: &Scenario,
    force: bool,
    skip_strip: bool,
) -> Vec<(SampleRecord, Option<WeylSample>)> {
    sc.lambdas
        .par_iter()
        .map(|&lambda| {
            let out = weyl_record(
                &sc.expr,
                &sc.completion,
                lambda,
                &sc.schedule,
                &sc.tol,
                force,
                skip_strip,
            );
            info!("λ = {lambda}: {:?}", out.0.status);
            out
        })
        .collect()
}

pub(crate) fn weyl_record(
    expr: &DiracExpression,
    comp: &Completion,
    lambda: Complex64,
    sched: &TruncationSchedule,
    tol: &Tolerances,
    force: bool,
    skip_strip: bool,
) -> (SampleRecord, Option<WeylSample>) {
    let (alpha, beta) = strip_bounds(expr, tol);
    let regime = Regime::of(lambda, alpha, beta);
    let sample = match weyl_solution(expr, comp, lambda, sched, tol, force) {
        Ok(s) => s,
        Err(e @ Error::UnwarrantedRegime { .. }) => {
            let status = if skip_strip {
                SampleStatus::Skipped
            } else {
                warn!("λ = {lambda}: {e}");
                SampleStatus::Refused
            };
            return (
                SampleRecord::bare(lambda, regime, status, e.to_string()),
                None,
            );
        }
        Err(e) => {
            warn!("λ = {lambda}: {e}");
            return (
                SampleRecord::bare(lambda, regime, SampleStatus::Failed, e.to_string()),
                None,
            );
        }
    };
    let mut record = SampleRecord {
        lambda: [lambda.re, lambda.im],
        regime,
        status: if sample.converged {
            SampleStatus::Converged
        } else {
            SampleStatus::NotConverged
        },
        label: sample.label.clone(),
        m: sample.m.as_ref().map(MatrixRepr::from_matrix),
        norm_residual: Some(sample.norm_residual),
        eq339: None,
        eq340: None,
        companion: None,
        schur_norm: None,
        converged: sample.converged,
        l_used: Some(sample.l_used),
        terminal: Some(sample.terminal),
        history: sample.history.clone(),
        message: None,
    };
    if !sample.converged {
        let last = sample.history.last();
        let msg = format!(
            "no convergence up to L = {}: last ‖ΔM‖ = {:.3e}, tail ratio = {:.3e}",
            sample.l_used,
            last.and_then(|h| h.delta).unwrap_or(f64::NAN),
            sample.tail_decay_ratio
        );
        warn!("λ = {lambda}: {msg}");
        record.message = Some(msg);
        return (record, Some(sample));
    }
    let m = sample.m.as_ref().expect("converged");
    record.schur_norm = cayley(m, tol).ok().map(|s| linalg::op_norm(&s));

    let mu = companion(lambda);
    let mut notes = Vec::new();
    match weyl_solution(expr, comp, mu, sched, tol, force) {
        Ok(other) if other.converged => match herglotz_residuals(expr, comp, &sample, &other) {
            Ok(h) => {
                record.eq339 = Some(h.eq339);
                record.eq340 = Some(h.eq340);
                record.companion = Some([mu.re, mu.im]);
            }
            Err(e) => notes.push(format!("identities skipped: {e}")),
        },
        Ok(_) => notes.push(format!("companion μ = {mu} did not converge")),
        Err(e) => notes.push(format!("companion μ = {mu}: {e}")),
    }
    if !notes.is_empty() {
        record.message = Some(notes.join("; "));
    }
    (record, Some(sample))
}

fn cauchy_riemann(sc: &Scenario, rows: &[SampleRecord]) -> Vec<CauchyRiemannPoint> {
    let Some((nr, ni)) = sc.config.lambda_grid.as_ref().and_then(|g| g.shape()) else {
        return Vec::new();
    };
    if nr < 3 || ni < 3 {
        return Vec::new();
    }
    let m_at = |i: usize, k: usize| rows[k * nr + i].m.as_ref().and_then(|m| m.to_matrix().ok());
    let mut out = Vec::new();
    for k in 1..ni - 1 {
        for i in 1..nr - 1 {
            let (Some(c0), Some(l), Some(r), Some(d), Some(u)) = (
                m_at(i, k),
                m_at(i - 1, k),
                m_at(i + 1, k),
                m_at(i, k - 1),
                m_at(i, k + 1),
            ) else {
                continue;
            };
            let hx = rows[k * nr + i + 1].lambda[0] - rows[k * nr + i - 1].lambda[0];
            let hy = rows[(k + 1) * nr + i].lambda[1] - rows[(k - 1) * nr + i].lambda[1];
            let dx = (r - l) / Complex64::new(hx, 0.0);
            let dy = (u - d) / Complex64::new(hy, 0.0);
            let residual = (dx + dy * I).norm() / c0.norm().max(1.0);
            out.push(CauchyRiemannPoint {
                lambda: rows[k * nr + i].lambda,
                residual,
            });
        }
    }
    out
}

pub(crate) fn defect_records(sc: &Scenario) -> Result<Vec<DefectRecord>, CliError> {
    sc.lambdas
        .par_iter()
        .map(|&lambda| {
            let r = count_l2(&sc.expr, lambda, sc.defect_length, &sc.tol)
                .map_err(|e| CliError::Config(format!("λ = {lambda}: {e}")))?;
            let verdict = match r.pass() {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "-",
            };
            if r.indeterminate {
                warn!(
                    "λ = {lambda}: indeterminate count, exponent {:?} within ±{:.3e}",
                    r.offending_exponent, r.margin
                );
            }
            Ok(DefectRecord {
                lambda: [lambda.re, lambda.im],
                regime: r.regime,
                count: r.count,
                expected: r.expected,
                expected_source: r.expected_source,
                indeterminate: r.indeterminate,
                offending_exponent: r.offending_exponent,
                margin: r.margin,
                exponents: r.exponents,
                length: r.length,
                verdict: verdict.to_string(),
            })
        })
        .collect()
}

fn finite_records(sc: &Scenario) -> Result<Vec<FiniteRecord>, CliError> {
    sc.lambdas
        .par_iter()
        .map(|&lambda| {
            let check = finite_interval_check(&sc.expr, lambda, &sc.tol)
                .map_err(|e| CliError::Config(format!("λ = {lambda}: {e}")))?;
            let verdict = if check.pass() { "PASS" } else { "FAIL" }.to_string();
            Ok(FiniteRecord { check, verdict })
        })
        .collect()
}

fn summarize(command: Command, r: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario {} ({})", r.scenario, r.subcommand);
    match command {
        Command::Classify => {
            let sym = &r.symmetry;
            let _ = writeln!(s, "formally selfadjoint  {}", sym.formally_selfadjoint);
            let _ = writeln!(s, "j-symmetric           {}", sym.j_symmetric);
            let _ = writeln!(s, "almost fsa            {}", sym.almost_fsa);
            let _ = writeln!(s, "strip                 [{}, {}]", r.strip[0], r.strip[1]);
            let _ = writeln!(s, "kappa                 ({}, {})", r.kappa[0], r.kappa[1]);
        }
        Command::Weyl | Command::Sweep => {
            for row in &r.samples {
                let _ = writeln!(
                    s,
                    "λ = {:+.4}{:+.4}i  {:?}  L = {}",
                    row.lambda[0],
                    row.lambda[1],
                    row.status,
                    row.l_used
                        .map(|l| l.to_string())
                        .unwrap_or_else(|| "-".into())
                );
            }
        }
        Command::Defect => {
            let _ = writeln!(
                s,
                "{:>10} {:>10} {:>6} {:>6} {:>9} verdict",
                "re λ", "im λ", "regime", "count", "expected"
            );
            for d in &r.defects {
                let _ = writeln!(
                    s,
                    "{:>10.4} {:>10.4} {:>6} {:>6} {:>9} {}",
                    d.lambda[0],
                    d.lambda[1],
                    d.regime.as_str(),
                    d.count,
                    d.expected
                        .map(|e| e.to_string())
                        .unwrap_or_else(|| "-".into()),
                    d.verdict
                );
            }
            for f in &r.finite {
                let c = &f.check;
                let _ = writeln!(
                    s,
                    "L = {}  n = {}  ker = {}  ker* = {}  traces = {}  sum = {}  {}",
                    c.length,
                    c.n,
                    c.kernel_dim,
                    c.kernel_dim_adjoint,
                    c.trace_rank
                        .map(|t| t.to_string())
                        .unwrap_or_else(|| "-".into()),
                    c.defect_sum,
                    f.verdict
                );
            }
        }
        Command::Verify => {
            for v in &r.verdicts {
                let _ = writeln!(
                    s,
                    "{:<18} {:<30} {:<4}  measured {}  threshold {}",
                    v.module,
                    v.invariant,
                    v.status.as_str(),
                    v.measured,
                    v.threshold
                );
            }
        }
    }
    let _ = writeln!(s, "exit {}", r.exit_code);
    s
}
