//! Packaged problem instances: feasible set, oracle pair, constants, and any
//! analytically known references.

mod nash;
mod toy;
mod traffic;

pub use nash::nash_problem;
pub use toy::{skew_toy, toy_problem, ToyConfig};
pub use traffic::{
    traffic_outer_mean, traffic_problem, traffic_problem_from_network, TrafficNetwork,
    DEFAULT_CAP_BOX, DEFAULT_MU_REG,
};

use crate::constants::ProblemConstants;
use crate::oracle::StochasticOracle;
use crate::point::Point;
use crate::set::FeasibleSet;

/// A high-accuracy solution computed by a reference solver, attached to a
/// problem when no analytic description exists.
#[derive(Clone, Debug)]
pub struct ComputedReference {
    pub point: Point,
    pub residual: f64,
}

/// Known reference data for scoring a run.
#[derive(Clone, Debug, Default)]
pub struct References {
    /// Analytic description of the inner solution set, when it is box-shaped
    /// (possibly degenerate).
    pub inner_solution_set: Option<FeasibleSet>,
    /// The bilevel solution, when known in closed form.
    pub outer_solution: Option<Point>,
    /// A numerically computed stand-in for problems without closed forms.
    pub computed: Option<ComputedReference>,
}

/// Which analytic metric surrogates apply to an instance.
#[derive(Clone, Debug)]
pub enum ProblemKind {
    /// The box-constrained two-player game instance.
    Nash,
    /// Wardrop equilibrium over a road network.
    Traffic(TrafficNetwork),
    /// Synthetic affine instance.
    Toy(ToyConfig),
    /// No analytic surrogates.
    Custom,
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub name: String,
    pub set: FeasibleSet,
    /// Constraint-level operator oracle.
    pub inner: StochasticOracle,
    /// Objective-level operator oracle.
    pub outer: StochasticOracle,
    pub constants: ProblemConstants,
    pub references: References,
    pub kind: ProblemKind,
    pub default_start: Point,
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// Attaches a numerically computed reference solution.
    pub fn attach_reference(&mut self, point: Point, residual: f64) {
        self.references.computed = Some(ComputedReference { point, residual });
    }

    /// The best available description of the bilevel solution, if any.
    pub fn best_reference(&self) -> Option<&Point> {
        self.references.outer_solution.as_ref().or(self
            .references
            .computed
            .as_ref()
            .map(|c| &c.point))
    }
}
