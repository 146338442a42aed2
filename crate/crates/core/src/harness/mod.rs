//! Alpha sweeps against the model brackets, the remainder rate fit and the
//! eigenvalue comparison bound.

mod comparison;
mod rate;
mod sweep;

pub use comparison::{comparison_bound, ComparisonInput};
pub use rate::{fit_rate, RateFit};
pub use sweep::{
    check_brackets, run_sweep, solve_level, worker_count, BcMode, BracketCheck, SolveRecord, SpecOverrides,
    SweepConfig, SweepRecord, SweepReport, TolPolicy, THREADS_ENV,
};
