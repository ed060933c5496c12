//! Convergence studies and named scenarios.

mod convergence;
mod scenarios;

pub use convergence::{
    fit_order, halving_ladder, run_convergence, simulate, steps_for, ConvergenceStudy, OrderEstimate, Reference,
};
pub use scenarios::{run_config, scenario_config, RunOutcome, AUDIT_TOL, SCENARIOS};
