//! High-accuracy reference solutions via a deterministic two-step
//! extrapolation loop on the mean maps: first the inner problem alone, then
//! a continuation in the regularization weight to single out the inner
//! solution preferred by the outer operator.

use crate::error::{CoreError, Result};
use crate::point::Point;
use crate::problems::ProblemInstance;

/// Eta continuation for the second phase, ending small enough that the
/// returned point certifies inner feasibility to well below 1e-6.
const ETA_LADDER: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

#[derive(Clone, Debug)]
pub struct ReferenceSolution {
    /// A solution of the inner problem alone.
    pub inner: Point,
    /// Natural-map residual of the inner problem at `inner`.
    pub inner_residual: f64,
    /// The regularization-limit point: an inner solution selected by the
    /// outer operator.
    pub bilevel: Point,
    /// Natural-map residual of the inner problem at `bilevel`.
    pub bilevel_residual: f64,
    pub iterations_used: usize,
}

struct Budget {
    left: usize,
    tolerance: f64,
}

/// Two projected evaluations per iteration; classic extrapolated scheme with
/// step `1 / (2 L)`. Returns the point and its natural residual.
fn extragradient(
    problem: &ProblemInstance,
    operator: &dyn Fn(&Point) -> Point,
    lipschitz: f64,
    start: Point,
    budget: &mut Budget,
) -> Result<(Point, f64)> {
    let step = 1.0 / (2.0 * lipschitz.max(1e-9));
    let set = &problem.set;
    let mut x = set.project(&start)?;
    let residual_at = |x: &Point| -> Result<f64> {
        let mut probe = x.clone();
        probe.axpy(-step, &operator(x));
        Ok(set.project(&probe)?.distance_to(x) / step)
    };
    let mut residual = residual_at(&x)?;
    while residual > budget.tolerance {
        if budget.left == 0 {
            return Err(CoreError::ReferenceDidNotConverge {
                iterations: 0,
                residual,
                tolerance: budget.tolerance,
            });
        }
        budget.left -= 1;
        let mut probe = x.clone();
        probe.axpy(-step, &operator(&x));
        let y = set.project(&probe)?;
        let mut next = x.clone();
        next.axpy(-step, &operator(&y));
        x = set.project(&next)?;
        residual = residual_at(&x)?;
    }
    Ok((x, residual))
}

/// Computes the inner and bilevel references on the deterministic mean maps.
/// Fails loudly if the iteration budget runs out before the tolerance is
/// met; the achieved residual is reported in the error.
pub fn reference_solution(
    problem: &ProblemInstance,
    max_iterations: usize,
    tolerance: f64,
) -> Result<ReferenceSolution> {
    if !(tolerance > 0.0) {
        return Err(CoreError::InvalidArgument(
            "tolerance must be positive".into(),
        ));
    }
    let mut budget = Budget {
        left: max_iterations,
        tolerance,
    };
    let c = &problem.constants;

    let inner_op = |x: &Point| problem.inner.mean(x);
    let (inner, inner_residual) = extragradient(
        problem,
        &inner_op,
        c.l_f,
        problem.default_start.clone(),
        &mut budget,
    )
    .map_err(|e| enrich(e, max_iterations, budget.left))?;

    let mut bilevel = inner.clone();
    for eta in ETA_LADDER {
        let regularized = |x: &Point| {
            let mut g = problem.inner.mean(x);
            g.axpy(eta, &problem.outer.mean(x));
            g
        };
        let (point, _) = extragradient(
            problem,
            &regularized,
            c.l_f + eta * c.l_h,
            bilevel,
            &mut budget,
        )
        .map_err(|e| enrich(e, max_iterations, budget.left))?;
        bilevel = point;
    }

    // certify the limit point against the plain inner problem
    let step = 1.0 / (2.0 * c.l_f.max(1e-9));
    let mut probe = bilevel.clone();
    probe.axpy(-step, &problem.inner.mean(&bilevel));
    let bilevel_residual = problem.set.project(&probe)?.distance_to(&bilevel) / step;

    Ok(ReferenceSolution {
        inner,
        inner_residual,
        bilevel,
        bilevel_residual,
        iterations_used: max_iterations - budget.left,
    })
}

fn enrich(err: CoreError, max_iterations: usize, left: usize) -> CoreError {
    match err {
        CoreError::ReferenceDidNotConverge {
            residual,
            tolerance,
            ..
        } => CoreError::ReferenceDidNotConverge {
            iterations: max_iterations - left,
            residual,
            tolerance,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::lcp_residual_phi;
    use crate::problems::{nash_problem, skew_toy, traffic_problem};

    #[test]
    fn game_inner_reference_lands_on_the_equilibrium_segment() {
        let p = nash_problem(false);
        let r = reference_solution(&p, 2_000_000, 1e-9).unwrap();
        assert!((r.inner[1] - 5.0).abs() < 1e-6, "{:?}", r.inner);
        // the bilevel point is the known outer solution
        assert!(r.bilevel.distance_to(&Point::new(vec![20.0, 5.0])) < 1e-3);
    }

    #[test]
    fn traffic_reference_certifies_complementarity() {
        let p = traffic_problem(false, None, 1e4).unwrap();
        let r = reference_solution(&p, 4_000_000, 1e-10).unwrap();
        let phi = lcp_residual_phi(&p, &r.bilevel).unwrap();
        assert!(phi <= 1e-6, "phi = {phi}");
        // demand is conserved at equilibrium
        let f = p.inner.mean(&r.bilevel);
        assert!(f[6].abs() < 1e-5 && f[7].abs() < 1e-5, "{f:?}");
    }

    #[test]
    fn toy_outer_reference_is_the_target() {
        let p = skew_toy(1, 0.0, 0.0);
        let r = reference_solution(&p, 500_000, 1e-10).unwrap();
        assert!((r.bilevel[0] - 0.3).abs() < 1e-6, "{:?}", r.bilevel);
    }

    #[test]
    fn exhausted_budget_is_an_error() {
        let p = nash_problem(false);
        let err = reference_solution(&p, 3, 1e-12).unwrap_err();
        assert!(matches!(err, CoreError::ReferenceDidNotConverge { .. }));
    }
}
