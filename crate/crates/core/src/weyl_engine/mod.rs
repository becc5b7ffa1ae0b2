//! Weyl solutions and Weyl functions on the half-line by truncation, the
//! L² characterization, the two Herglotz-type identities, the Cayley
//! transform and the whole-line product scan.

mod identities;
mod l2;
mod schedule;
mod solution;
mod whole_line;

pub use identities::{
    cayley, herglotz_residuals, sign_check, HerglotzResiduals, SchurSample, SignCheck,
};
pub use l2::{verify_l2_characterization, L2Characterization, L2Verdict, L2Window};
pub use schedule::TruncationSchedule;
pub use solution::{
    weyl_function_from_boundary, weyl_solution, SolutionSamples, TerminalCondition, TruncationStep,
    WeylSample,
};
pub use whole_line::{whole_line_product_scan, ProductScan};
