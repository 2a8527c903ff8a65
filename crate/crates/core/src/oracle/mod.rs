//! Brute-force operator enumeration over small prime fields, and coverage of
//! the enumerated solutions by family charts. Coverage is evidence that the
//! charts are exhaustive, not a proof.

mod coverage;
mod fp;
mod membership;

pub use coverage::{
    coverage, coverage_sweep, involves_imaginary, CoverageReport, CoverageSweep, SweepConfig,
};
pub use fp::{
    dual_path_check, enumerate_compiled, enumerate_solutions, search_size, CompiledSystem,
    DirectEvaluator, DualPathReport, FpMatrix, DEFAULT_BUDGET,
};
pub use membership::{chart_membership, FpChart, MEMBERSHIP_BUDGET};
