//! Microbenchmark crate; see `benches/solver.rs`. Shared fixtures live here
//! so criterion targets stay small.

use ropex_core::{nash_problem, ProblemInstance};

pub fn game() -> ProblemInstance {
    nash_problem(false)
}
