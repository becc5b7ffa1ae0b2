//! Batch front-end: scenario configs, the `classify`, `weyl`, `defect`,
//! `verify` and `sweep` pipelines, and deterministic report writers.
//!
//! Every run writes `report.json` into the output directory. With the CSV
//! format, `weyl`, `sweep` and `verify` also write `msamples.csv`, and
//! `defect` and `verify` write `defects.csv`. Rows always follow the order of
//! the λ grid, whatever the thread count.

mod config;
mod output;
mod pipeline;
mod verify;

use std::path::PathBuf;

pub use config::{
    build_completion, build_expression, builtin, BoundaryBlock, DefectBlock, ExpressionBlock,
    IntervalBlock, LambdaGrid, MatrixRepr, OutputFormat, OutputsBlock, PotentialBlock, Scenario,
    ScenarioConfig, SignatureBlock, BUILTIN_SCENARIOS, SCHEMA_VERSION,
};
pub use output::{defects_header, msamples_header, num, REPORT_SCHEMA};
pub use pipeline::{
    run, run_scenario, CauchyRiemannPoint, CompletionEcho, DefectRecord, FiniteRecord, RunOutcome,
    RunReport, SampleRecord, SampleStatus,
};
pub use verify::{verify_suite, Status, SuiteVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Classify,
    Weyl,
    Defect,
    Verify,
    Sweep,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Classify => "classify",
            Self::Weyl => "weyl",
            Self::Defect => "defect",
            Self::Verify => "verify",
            Self::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `outputs.dir`; falls back to `./out`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Compute strip-regime candidates instead of refusing them.
    pub force: bool,
    /// Overrides `outputs.format`.
    pub format: Option<OutputFormat>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Io(_) => 1,
        }
    }
}

/// Exit status of a completed run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_INVARIANT_FAIL: i32 = 4;
