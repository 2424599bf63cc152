// `!(x > 0)` is used for validation on purpose: unlike `x <= 0`, it also
// rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Solvers, step-size schedules, benchmark problems, and gap metrics for
//! monotone bilevel variational inequalities.
//!
//! A bilevel variational inequality poses an outer VI over the solution set
//! of an inner VI. The solver here runs a single projected proximal loop on
//! the regularized operator `F + eta_k H` with an operator-extrapolation
//! correction, needing one evaluation per operator per iteration, and
//! returns a weighted average of the iterates. Modules:
//!
//! - [`point`], [`set`], [`oracle`], [`constants`]: domain types — points,
//!   feasible sets with exact projection, seeded stochastic oracles, and
//!   problem moduli.
//! - [`schedule`], [`validate`], [`bounds`]: the step-size policies, their
//!   validity conditions, and the closed-form rate certificates.
//! - [`solver`]: the iteration itself.
//! - [`problems`]: packaged instances — a box-constrained game, a traffic
//!   equilibrium network, and synthetic affine toys.
//! - [`metrics`]: gap functions, complementarity residuals, reference
//!   solutions, and log-log rate fitting.

pub mod bounds;
pub mod constants;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod point;
pub mod problems;
pub mod schedule;
pub mod set;
pub mod solver;
pub mod validate;

pub use bounds::{theoretical_bounds, BoundReport};
pub use constants::ProblemConstants;
pub use error::{CoreError, Result};
pub use metrics::{
    brute_force_report, evaluate_gaps, feasibility_gap_bruteforce, iterate_drift, lcp_residual_phi,
    loglog_rate_fit, nash_outer_gap, nash_saddle_gap, optimality_gap_bruteforce,
    reference_solution, score_run, GapMethod, GapReport, MetricRow, ReferenceSolution,
    METRIC_COLUMNS,
};
pub use oracle::{NoiseModel, OperatorTag, SeededStream, StochasticOracle};
pub use point::Point;
pub use problems::{
    nash_problem, skew_toy, toy_problem, traffic_outer_mean, traffic_problem,
    traffic_problem_from_network, ProblemInstance, ProblemKind, References, ToyConfig,
    TrafficNetwork, DEFAULT_CAP_BOX, DEFAULT_MU_REG,
};
pub use schedule::{build_schedule, build_schedule_with_eta, PolicyKind, Schedule, ScheduleRow};
pub use set::{FeasibleSet, SetShape};
pub use solver::{
    assemble_direction, averaged_iterate, init_state, run, step, Cadence, Checkpoint, RunConfig,
    RunRecord, SolverState,
};
pub use validate::{
    validate_conditions, ConditionId, ConditionReport, ConditionStatus, ValidationReport,
};
