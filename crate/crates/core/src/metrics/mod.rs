//! Scoring machinery: gap functions, distances, complementarity residuals,
//! reference solutions, and log-log rate fits.
//!
//! Gap maximization is intractable in general, so two routes exist: an exact
//! separable route for affine operators over boxes (the game and toy
//! instances), and a grid brute force restricted to low dimension that serves
//! as the independent cross-check.

mod reference;

pub use reference::{reference_solution, ReferenceSolution};

use crate::error::{CoreError, Result};
use crate::point::Point;
use crate::problems::{ProblemInstance, ProblemKind, ToyConfig};
use crate::set::FeasibleSet;
use crate::solver::{Checkpoint, RunRecord};

/// How a reported value was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GapMethod {
    Analytic,
    BruteForce { grid_step: f64 },
    Reference { residual: f64 },
}

/// Metric bundle for one evaluated point. Absent fields mean the problem
/// does not support that metric.
#[derive(Clone, Debug, Default)]
pub struct GapReport {
    pub feasibility_gap: Option<f64>,
    pub optimality_gap: Option<f64>,
    pub dist_inner: Option<f64>,
    pub saddle_gap: Option<f64>,
    pub outer_gap: Option<f64>,
    pub lcp_phi: Option<f64>,
    pub method: Option<GapMethod>,
}

/// One scored checkpoint of a run; the serialization schema mirrors this.
#[derive(Clone, Debug)]
pub struct MetricRow {
    pub step: usize,
    pub wall_seconds: f64,
    pub average: Point,
    pub gaps: GapReport,
    pub iterate_drift: Option<f64>,
}

pub const METRIC_COLUMNS: [&str; 7] = [
    "dist_inner",
    "feasibility_gap",
    "optimality_gap",
    "saddle_gap",
    "outer_gap",
    "lcp_phi",
    "iterate_drift",
];

impl MetricRow {
    pub fn metric_values(&self) -> [Option<f64>; 7] {
        [
            self.gaps.dist_inner,
            self.gaps.feasibility_gap,
            self.gaps.optimality_gap,
            self.gaps.saddle_gap,
            self.gaps.outer_gap,
            self.gaps.lcp_phi,
            self.iterate_drift,
        ]
    }
}

// ---------------------------------------------------------------------------
// exact gaps for affine operators with skew-plus-scaled-identity structure

/// `F(x) = A (x - c) + s (x - c) + b` with `A` the pairwise rotation
/// generator. `<F(x), xt - x>` is then separable across coordinates, so its
/// maximum over a box is exact.
pub(crate) struct SeparableAffine {
    pub rotation: f64,
    pub symmetric: f64,
    pub drift: Vec<f64>,
    pub center: Vec<f64>,
}

impl SeparableAffine {
    pub fn from_toy(cfg: &ToyConfig) -> Self {
        SeparableAffine {
            rotation: cfg.rotation,
            symmetric: cfg.symmetric,
            drift: vec![cfg.drift; cfg.n],
            center: cfg.center_point().into_vec(),
        }
    }

    fn nash_inner() -> Self {
        SeparableAffine {
            rotation: -2.0,
            symmetric: 0.0,
            drift: vec![10.0, 0.0],
            center: vec![0.0, 0.0],
        }
    }

    fn identity_about(center: Vec<f64>) -> Self {
        let n = center.len();
        SeparableAffine {
            rotation: 0.0,
            symmetric: 1.0,
            drift: vec![0.0; n],
            center,
        }
    }

    /// `M^T u` for the linear part `M = A + s I`.
    fn transpose_linear(&self, u: &Point) -> Point {
        let n = u.dim();
        let mut out = u.scale(self.symmetric);
        for p in 0..n / 2 {
            let (i, j) = (2 * p, 2 * p + 1);
            out[i] -= self.rotation * u[j];
            out[j] += self.rotation * u[i];
        }
        out
    }

    /// `max_{x in domain} <F(x), xt - x>`, exact.
    pub fn gap_over_box(&self, domain: &FeasibleSet, x_tilde: &Point) -> Result<f64> {
        let n = x_tilde.dim();
        let (lo, hi) = domain.bounds();
        if lo.len() != n {
            return Err(CoreError::DimensionMismatch {
                expected: lo.len(),
                got: n,
            });
        }
        let center = Point::new(self.center.clone());
        let u_tilde = x_tilde.sub(&center);
        let w_lin = self.transpose_linear(&u_tilde);
        let s = self.symmetric;
        let mut total = 0.0;
        for i in 0..n {
            total += self.drift[i] * u_tilde[i];
            let a = lo[i] - self.center[i];
            let b = match hi[i] {
                Some(h) => h - self.center[i],
                None => {
                    return Err(CoreError::Unsupported(
                        "exact gap needs a bounded domain".into(),
                    ))
                }
            };
            let w = w_lin[i] - self.drift[i];
            let value_at = |u: f64| -s * u * u + w * u;
            total += if s > 0.0 {
                let vertex = (w / (2.0 * s)).clamp(a, b);
                value_at(vertex)
            } else {
                value_at(a).max(value_at(b))
            };
        }
        Ok(total)
    }
}

// ---------------------------------------------------------------------------
// brute-force gaps

fn finite_box_bounds(set: &FeasibleSet) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = set.bounds();
    let hi: Option<Vec<f64>> = hi.into_iter().collect();
    match hi {
        Some(hi) => Ok((lo, hi)),
        None => Err(CoreError::Unsupported(
            "brute-force gaps need a bounded box".into(),
        )),
    }
}

fn for_each_grid_point(
    lo: &[f64],
    hi: &[f64],
    grid_step: f64,
    mut f: impl FnMut(&Point),
) -> Result<()> {
    if !(grid_step > 0.0) {
        return Err(CoreError::InvalidArgument(
            "grid step must be positive".into(),
        ));
    }
    let counts: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| ((h - l) / grid_step).ceil() as usize + 1)
        .collect();
    let mut idx = vec![0usize; lo.len()];
    let mut point = Point::new(lo.to_vec());
    loop {
        for (i, &ix) in idx.iter().enumerate() {
            point[i] = (lo[i] + ix as f64 * grid_step).min(hi[i]);
        }
        f(&point);
        // odometer increment
        let mut d = 0;
        loop {
            if d == idx.len() {
                return Ok(());
            }
            idx[d] += 1;
            if idx[d] < counts[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// `max_x <F(x), xt - x>` over a uniform grid on the feasible box, exact up
/// to the grid modulus. Deterministic mean map only; dimension capped at 3.
pub fn feasibility_gap_bruteforce(
    problem: &ProblemInstance,
    x_tilde: &Point,
    grid_step: f64,
) -> Result<f64> {
    if problem.dim() > 3 {
        return Err(CoreError::Unsupported(format!(
            "brute force is limited to 3 dimensions, problem has {}",
            problem.dim()
        )));
    }
    let (lo, hi) = finite_box_bounds(&problem.set)?;
    let mut best = f64::NEG_INFINITY;
    for_each_grid_point(&lo, &hi, grid_step, |x| {
        let val = problem.inner.mean(x).dot(&x_tilde.sub(x));
        if val > best {
            best = val;
        }
    })?;
    Ok(best)
}

/// `max_x <H(x), xt - x>` over the analytic inner solution set, on a grid
/// over its free axes (at most 2). Can be negative away from the set.
pub fn optimality_gap_bruteforce(
    problem: &ProblemInstance,
    x_tilde: &Point,
    grid_step: f64,
) -> Result<f64> {
    let target = problem
        .references
        .inner_solution_set
        .as_ref()
        .ok_or_else(|| {
            CoreError::Unsupported("no analytic inner solution set on this problem".into())
        })?;
    let (lo, hi) = finite_box_bounds(target)?;
    let free = lo.iter().zip(&hi).filter(|(l, h)| h > l).count();
    if free > 2 {
        return Err(CoreError::Unsupported(format!(
            "brute force is limited to 2 free axes, solution set has {free}"
        )));
    }
    let mut best = f64::NEG_INFINITY;
    for_each_grid_point(&lo, &hi, grid_step, |x| {
        let val = problem.outer.mean(x).dot(&x_tilde.sub(x));
        if val > best {
            best = val;
        }
    })?;
    Ok(best)
}

// ---------------------------------------------------------------------------
// closed-form surrogates for the game instance

/// Expected payoff `E[25 - 2 x1 x2 + xi x1]` of the game.
pub fn nash_payoff(x1: f64, x2: f64) -> f64 {
    25.0 - 2.0 * x1 * x2 + 10.0 * x1
}

/// `f(x1, 5) - f(20, x2)`, which collapses to `40 (x2 - 5)`.
pub fn nash_saddle_gap(x_tilde: &Point) -> f64 {
    40.0 * (x_tilde[1] - 5.0)
}

/// `psi(x) - psi(x*)` for the outer objective `0.5 E||x + zeta||^2`; the
/// noise constant cancels, leaving `0.5 ||x||^2 - 212.5`.
pub fn nash_outer_gap(x_tilde: &Point) -> f64 {
    0.5 * x_tilde.norm_sq() - 212.5
}

/// Exact feasibility gap of the game via the separable route.
pub fn nash_feasibility_gap(problem_set: &FeasibleSet, x_tilde: &Point) -> Result<f64> {
    SeparableAffine::nash_inner().gap_over_box(problem_set, x_tilde)
}

/// Bundles the grid-based gap evaluations with their provenance. The brute
/// force is the independent cross-check for the analytic routes above.
pub fn brute_force_report(problem: &ProblemInstance, x_tilde: &Point, grid_step: f64) -> GapReport {
    GapReport {
        feasibility_gap: feasibility_gap_bruteforce(problem, x_tilde, grid_step).ok(),
        optimality_gap: optimality_gap_bruteforce(problem, x_tilde, grid_step).ok(),
        dist_inner: problem
            .references
            .inner_solution_set
            .as_ref()
            .and_then(|s| s.distance(x_tilde).ok()),
        lcp_phi: lcp_residual_phi(problem, x_tilde).ok(),
        saddle_gap: None,
        outer_gap: None,
        method: Some(GapMethod::BruteForce { grid_step }),
    }
}

// ---------------------------------------------------------------------------
// complementarity residual

/// `phi(x) = ||min(x, 0)|| + ||min(F(x), 0)|| + |x^T F(x)|`, zero exactly on
/// the complementarity solution set. Uses the deterministic mean map.
pub fn lcp_residual_phi(problem: &ProblemInstance, x_tilde: &Point) -> Result<f64> {
    x_tilde.check_dim(problem.dim())?;
    let fx = problem.inner.mean(x_tilde);
    let neg_norm = |p: &Point| {
        p.as_slice()
            .iter()
            .map(|v| v.min(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    Ok(neg_norm(x_tilde) + neg_norm(&fx) + x_tilde.dot(&fx).abs())
}

// ---------------------------------------------------------------------------
// trajectory metrics

/// `||avg_j - avg_{j-1}||` at checkpoint granularity.
pub fn iterate_drift(checkpoints: &[Checkpoint], index: usize) -> Result<f64> {
    if index == 0 || index >= checkpoints.len() {
        return Err(CoreError::InvalidArgument(
            "drift needs two consecutive checkpoints".into(),
        ));
    }
    Ok(checkpoints[index]
        .average
        .distance_to(&checkpoints[index - 1].average))
}

// ---------------------------------------------------------------------------
// rate fitting

/// Least-squares slope and intercept of `log(value)` against `log(k)`.
pub fn loglog_rate_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(CoreError::InvalidArgument(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(k, v)| *k <= 0.0 || *v <= 0.0) {
        return Err(CoreError::InvalidArgument(
            "rate fit needs positive abscissas and values".into(),
        ));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(k, _)| k.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(CoreError::InvalidArgument(
            "rate fit needs at least two distinct abscissas".into(),
        ));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    Ok((slope, ybar - slope * xbar))
}

// ---------------------------------------------------------------------------
// whole-run scoring

/// Evaluates every metric the problem supports at one point.
pub fn evaluate_gaps(problem: &ProblemInstance, x_tilde: &Point) -> GapReport {
    let mut report = GapReport::default();
    match &problem.kind {
        ProblemKind::Nash => {
            report.method = Some(GapMethod::Analytic);
            report.feasibility_gap = nash_feasibility_gap(&problem.set, x_tilde).ok();
            report.saddle_gap = Some(nash_saddle_gap(x_tilde));
            report.outer_gap = Some(nash_outer_gap(x_tilde));
            if let Some(set) = &problem.references.inner_solution_set {
                report.dist_inner = set.distance(x_tilde).ok();
                report.optimality_gap = SeparableAffine::identity_about(vec![0.0, 0.0])
                    .gap_over_box(set, x_tilde)
                    .ok();
            }
        }
        ProblemKind::Toy(cfg) => {
            report.method = Some(GapMethod::Analytic);
            report.feasibility_gap = SeparableAffine::from_toy(cfg)
                .gap_over_box(&problem.set, x_tilde)
                .ok();
            if let Some(set) = &problem.references.inner_solution_set {
                report.dist_inner = set.distance(x_tilde).ok();
                report.optimality_gap =
                    SeparableAffine::identity_about(cfg.target_point().into_vec())
                        .gap_over_box(set, x_tilde)
                        .ok();
            }
        }
        ProblemKind::Traffic(net) => {
            report.lcp_phi = lcp_residual_phi(problem, x_tilde).ok();
            if let Some(reference) = &problem.references.computed {
                report.method = Some(GapMethod::Reference {
                    residual: reference.residual,
                });
                report.dist_inner = Some(x_tilde.distance_to(&reference.point));
                if let (Ok(at), Ok(best)) =
                    (net.total_cost(x_tilde), net.total_cost(&reference.point))
                {
                    report.outer_gap = Some(at - best);
                }
            } else {
                report.method = Some(GapMethod::Analytic);
            }
        }
        ProblemKind::Custom => {}
    }
    report
}

/// Scores every checkpoint of a finished run.
pub fn score_run(problem: &ProblemInstance, record: &RunRecord) -> Vec<MetricRow> {
    record
        .checkpoints
        .iter()
        .enumerate()
        .map(|(i, cp)| MetricRow {
            step: cp.step,
            wall_seconds: cp.wall_seconds,
            average: cp.average.clone(),
            gaps: evaluate_gaps(problem, &cp.average),
            iterate_drift: iterate_drift(&record.checkpoints, i).ok(),
        })
        .collect()
}
