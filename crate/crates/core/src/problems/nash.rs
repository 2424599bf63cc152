//! The box-constrained two-player game instance.
//!
//! The inner operator is the pseudo-gradient of the zero-sum payoff
//! `E[25 - 2 x1 x2 + xi x1]` with `xi ~ N(10, 1)` over
//! `X = [20, 50] x [5, 15]`, whose equilibria form the segment `x2 = 5`.
//! The outer operator is the gradient of `E[0.5 ||x + zeta||^2]` with
//! standard Gaussian `zeta`, minimized over that segment at `(20, 5)`.

use crate::constants::ProblemConstants;
use crate::oracle::StochasticOracle;
use crate::point::Point;
use crate::problems::{ProblemInstance, ProblemKind, References};
use crate::set::FeasibleSet;

pub const NASH_ALPHA: f64 = 40.0;

/// Builds the game instance. The flag only toggles whether the declared
/// constants advertise the outer operator's strong monotonicity (the operator
/// itself is the same either way); policies read the declaration.
pub fn nash_problem(strongly_monotone: bool) -> ProblemInstance {
    let set = FeasibleSet::box_set(Point::new(vec![20.0, 5.0]), Point::new(vec![50.0, 15.0]))
        .expect("static box");

    // E[xi] = 10; noise only enters the first coordinate.
    let inner = StochasticOracle::with_gaussian_noise(
        2,
        |x: &Point| Point::new(vec![-2.0 * x[1] + 10.0, 2.0 * x[0]]),
        vec![1.0, 0.0],
    );
    // gradient of 0.5||x + zeta||^2 in expectation is x; unit noise per axis.
    let outer = StochasticOracle::with_gaussian_noise(2, |x: &Point| x.clone(), vec![1.0, 1.0]);

    let constants = ProblemConstants {
        l_f: 2.0, // spectral norm of the skew payoff coupling
        l_h: 1.0,
        m_f: 0.0,
        m_h: 0.0,
        sigma_f: 1.0,
        sigma_h: 2f64.sqrt(),
        mu_h: if strongly_monotone { 1.0 } else { 0.0 },
        c_f: Some((400.0f64 + 10_000.0).sqrt()), // max over the box of ||F||
        c_h: Some(2_725f64.sqrt()),              // ||(50, 15)||
        b_f: Some(100.0),                        // ||F|| on the segment peaks at x1 = 50
        b_h: Some(2_525f64.sqrt()),              // ||(50, 5)||
        alpha: Some(NASH_ALPHA),
        h_at_xstar_norm: Some(425f64.sqrt()), // ||(20, 5)||
    };

    let references = References {
        inner_solution_set: Some(
            FeasibleSet::box_set(Point::new(vec![20.0, 5.0]), Point::new(vec![50.0, 5.0]))
                .expect("static segment"),
        ),
        outer_solution: Some(Point::new(vec![20.0, 5.0])),
        computed: None,
    };

    let default_start = set.anchor();
    ProblemInstance {
        name: if strongly_monotone {
            "nash-strong".into()
        } else {
            "nash".into()
        },
        set,
        inner,
        outer,
        constants,
        references,
        kind: ProblemKind::Nash,
        default_start,
    }
}
