//! The single-loop iteration: at each step the regularized operator
//! `F + eta_k H` is sampled once per operator, extrapolated against the
//! previous iteration's cached samples, and a projected proximal step is
//! taken. The returned answer is the tau-weighted average of the iterates.

use std::time::Instant;

use crate::error::{CoreError, Result};
use crate::oracle::{OperatorTag, SeededStream};
use crate::point::Point;
use crate::problems::ProblemInstance;
use crate::schedule::{PolicyKind, Schedule, ScheduleRow};

/// How often the weighted average is snapshotted during a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Cadence {
    /// Powers of two plus the final step; log-evenly spaced for rate fits.
    #[default]
    Geometric,
    /// Every `m` completed steps plus the final step.
    Every(usize),
}

impl Cadence {
    fn is_checkpoint(self, step: usize, last_step: usize) -> bool {
        if step == last_step {
            return true;
        }
        match self {
            Cadence::Geometric => step.is_power_of_two(),
            Cadence::Every(m) => m > 0 && step.is_multiple_of(m),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub horizon: usize,
    pub policy: PolicyKind,
    /// Mini-batch size for the inner oracle; 1 unless mini-batching.
    pub batch_size: usize,
    pub metric_cadence: Cadence,
    pub seed: u64,
    pub replication: u64,
    /// Starting point; projected onto the feasible set. Defaults to the
    /// problem's anchor (box midpoint, or all-ones on the orthant).
    pub start: Option<Point>,
}

impl RunConfig {
    pub fn new(policy: PolicyKind, horizon: usize, seed: u64) -> Self {
        RunConfig {
            horizon,
            policy,
            batch_size: 1,
            metric_cadence: Cadence::Geometric,
            seed,
            replication: 0,
            start: None,
        }
    }

    pub fn with_replication(mut self, replication: u64) -> Self {
        self.replication = replication;
        self
    }
}

/// Snapshot of the averaged iterate after `step` completed iterations.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub step: usize,
    pub average: Point,
    pub wall_seconds: f64,
}

/// Everything a finished run produced. Immutable; safe to ship across
/// threads and serialize.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub policy: PolicyKind,
    pub horizon: usize,
    pub seed: u64,
    pub replication: u64,
    pub batch_size: usize,
    pub start: Point,
    pub checkpoints: Vec<Checkpoint>,
    pub final_average: Point,
}

/// Live iteration state. `x_prev`/`f_prev`/`h_prev` hold the previous
/// iteration's point and its cached operator samples; at `k = 1` they equal
/// the current ones so the first extrapolation correction is exactly zero.
#[derive(Clone, Debug)]
pub struct SolverState {
    k: usize,
    x_curr: Point,
    x_prev: Point,
    f_prev: Point,
    h_prev: Point,
    eta_prev: f64,
    weighted_sum: Point,
    weight_total: f64,
    batch_size: usize,
    stream_f: SeededStream,
    stream_h: SeededStream,
}

impl SolverState {
    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn x_current(&self) -> &Point {
        &self.x_curr
    }

    pub fn x_previous(&self) -> &Point {
        &self.x_prev
    }

    pub fn cached_inner_sample(&self) -> &Point {
        &self.f_prev
    }

    pub fn cached_outer_sample(&self) -> &Point {
        &self.h_prev
    }

    pub fn completed_steps(&self) -> usize {
        self.k - 1
    }
}

/// Primes the state: both the previous and current points are the projected
/// start, and the caches hold the iteration-1 samples so the first bracket
/// vanishes identically. `eta_prev` is seeded with the first row's eta.
pub fn init_state(
    problem: &ProblemInstance,
    schedule: &Schedule,
    config: &RunConfig,
) -> Result<SolverState> {
    if schedule.rows.len() + 1 < config.horizon {
        return Err(CoreError::InvalidArgument(format!(
            "schedule has {} rows but the horizon {} needs {}",
            schedule.rows.len(),
            config.horizon,
            config.horizon - 1
        )));
    }
    if schedule.rows.is_empty() {
        return Err(CoreError::InvalidArgument("empty schedule".into()));
    }
    if config.batch_size == 0 {
        return Err(CoreError::InvalidArgument("batch size must be >= 1".into()));
    }
    let start_raw = config
        .start
        .clone()
        .unwrap_or_else(|| problem.default_start.clone());
    if !start_raw.is_finite() {
        return Err(CoreError::NonFinite {
            context: "starting point".into(),
        });
    }
    let x0 = problem.set.project(&start_raw)?;

    let stream_f = SeededStream::new(config.seed, config.replication, OperatorTag::Inner);
    let stream_h = SeededStream::new(config.seed, config.replication, OperatorTag::Outer);

    // Iteration-1 samples, drawn once here and reused by the first step.
    let f1 = problem
        .inner
        .sample_batch(&x0, &stream_f.at(1), config.batch_size)?;
    let h1 = problem.outer.sample(&x0, &stream_h.at(1))?;

    let dim = x0.dim();
    Ok(SolverState {
        k: 1,
        x_prev: x0.clone(),
        x_curr: x0,
        f_prev: f1,
        h_prev: h1,
        eta_prev: schedule.rows[0].eta,
        weighted_sum: Point::zeros(dim),
        weight_total: 0.0,
        batch_size: config.batch_size,
        stream_f,
        stream_h,
    })
}

/// The extrapolated regularized operator:
/// `g = F_k + eta_k H_k + theta_k [ F_k + eta_prev H_k - (F_prev + eta_prev H_prev) ]`.
/// Note the base term weighs `H_k` by the current eta while the bracket uses
/// the previous one on both outer samples.
pub fn assemble_direction(
    state: &SolverState,
    row: &ScheduleRow,
    f_k: &Point,
    h_k: &Point,
) -> Point {
    let n = f_k.dim();
    let mut g = Point::zeros(n);
    for i in 0..n {
        let bracket =
            f_k[i] + state.eta_prev * h_k[i] - (state.f_prev[i] + state.eta_prev * state.h_prev[i]);
        g[i] = f_k[i] + row.eta * h_k[i] + row.theta * bracket;
    }
    g
}

/// One iteration: sample both operators at the current point (reusing the
/// primed samples at `k = 1`), assemble the direction, take the projected
/// proximal step, and fold the new iterate into the weighted average.
pub fn step(state: &mut SolverState, row: &ScheduleRow, problem: &ProblemInstance) -> Result<()> {
    let (f_k, h_k) = if state.k == 1 {
        // primed at init; consuming them keeps one evaluation per operator
        (state.f_prev.clone(), state.h_prev.clone())
    } else {
        let f = problem.inner.sample_batch(
            &state.x_curr,
            &state.stream_f.at(state.k as u64),
            state.batch_size,
        )?;
        let h = problem
            .outer
            .sample(&state.x_curr, &state.stream_h.at(state.k as u64))?;
        (f, h)
    };

    let g = assemble_direction(state, row, &f_k, &h_k);
    if !g.is_finite() {
        return Err(CoreError::NonFiniteDirection { iteration: state.k });
    }

    // closed form of the Euclidean proximal step
    let mut shifted = state.x_curr.clone();
    shifted.axpy(-row.gamma, &g);
    let x_next = problem.set.project(&shifted)?;

    state.weighted_sum.axpy(row.tau, &x_next);
    state.weight_total += row.tau;

    state.x_prev = std::mem::replace(&mut state.x_curr, x_next);
    state.f_prev = f_k;
    state.h_prev = h_k;
    state.eta_prev = row.eta;
    state.k += 1;
    Ok(())
}

/// The tau-weighted average of the iterates produced so far.
pub fn averaged_iterate(state: &SolverState) -> Result<Point> {
    if state.weight_total <= 0.0 {
        return Err(CoreError::InvalidArgument(
            "no completed steps to average".into(),
        ));
    }
    Ok(state.weighted_sum.scale(1.0 / state.weight_total))
}

/// Runs the full horizon (`K - 1` steps) and snapshots the averaged iterate
/// at the configured cadence. Deterministic given `(seed, replication)` and
/// the configuration; wall times are the only nondeterministic field.
pub fn run(
    problem: &ProblemInstance,
    schedule: &Schedule,
    config: &RunConfig,
) -> Result<RunRecord> {
    let mut state = init_state(problem, schedule, config)?;
    let start_point = state.x_curr.clone();
    let last_step = config.horizon - 1;
    let clock = Instant::now();
    let mut checkpoints = Vec::new();

    for k in 1..=last_step {
        step(&mut state, schedule.row(k), problem)?;
        if config.metric_cadence.is_checkpoint(k, last_step) {
            checkpoints.push(Checkpoint {
                step: k,
                average: averaged_iterate(&state)?,
                wall_seconds: clock.elapsed().as_secs_f64(),
            });
        }
    }

    let final_average = averaged_iterate(&state)?;
    Ok(RunRecord {
        policy: config.policy,
        horizon: config.horizon,
        seed: config.seed,
        replication: config.replication,
        batch_size: config.batch_size,
        start: start_point,
        checkpoints,
        final_average,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{nash_problem, toy_problem, ToyConfig};
    use crate::schedule::build_schedule;

    fn flat_schedule(policy: PolicyKind, horizon: usize, eta: f64, gamma: f64) -> Schedule {
        Schedule {
            policy,
            horizon,
            batch_size: 1,
            rows: (1..horizon)
                .map(|k| ScheduleRow {
                    k,
                    tau: 1.0,
                    theta: 0.0,
                    eta,
                    gamma,
                })
                .collect(),
        }
    }

    #[test]
    fn default_start_is_the_box_center() {
        let problem = nash_problem(false);
        let schedule = build_schedule(
            PolicyKind::MonotoneFixed,
            &problem.constants,
            problem.set.require_radius().unwrap(),
            16,
            None,
        )
        .unwrap();
        let state = init_state(
            &problem,
            &schedule,
            &RunConfig::new(PolicyKind::MonotoneFixed, 16, 1),
        )
        .unwrap();
        assert_eq!(state.x_current().as_slice(), &[35.0, 10.0]);
    }

    #[test]
    fn explicit_start_is_projected() {
        let problem = nash_problem(false);
        let schedule = build_schedule(
            PolicyKind::MonotoneFixed,
            &problem.constants,
            problem.set.require_radius().unwrap(),
            16,
            None,
        )
        .unwrap();
        let mut config = RunConfig::new(PolicyKind::MonotoneFixed, 16, 1);
        config.start = Some(Point::zeros(2));
        let state = init_state(&problem, &schedule, &config).unwrap();
        assert_eq!(state.x_current().as_slice(), &[20.0, 5.0]);
    }

    #[test]
    fn short_or_empty_schedules_are_rejected_at_init() {
        let problem = nash_problem(false);
        let schedule = build_schedule(
            PolicyKind::MonotoneFixed,
            &problem.constants,
            problem.set.require_radius().unwrap(),
            8,
            None,
        )
        .unwrap();
        // horizon larger than the schedule covers
        let config = RunConfig::new(PolicyKind::MonotoneFixed, 32, 1);
        assert!(init_state(&problem, &schedule, &config).is_err());
        let empty = Schedule {
            policy: PolicyKind::MonotoneFixed,
            horizon: 8,
            batch_size: 1,
            rows: Vec::new(),
        };
        let config = RunConfig::new(PolicyKind::MonotoneFixed, 1, 1);
        assert!(init_state(&problem, &empty, &config).is_err());
    }

    #[test]
    fn first_extrapolation_bracket_is_zero() {
        let problem = nash_problem(false); // noisy oracles
        let schedule = build_schedule(
            PolicyKind::MonotoneFixed,
            &problem.constants,
            problem.set.require_radius().unwrap(),
            16,
            None,
        )
        .unwrap();
        let state = init_state(
            &problem,
            &schedule,
            &RunConfig::new(PolicyKind::MonotoneFixed, 16, 77),
        )
        .unwrap();
        let row = ScheduleRow {
            k: 1,
            tau: 1.0,
            theta: 1.0,
            eta: schedule.row(1).eta,
            gamma: schedule.row(1).gamma,
        };
        let f1 = state.cached_inner_sample().clone();
        let h1 = state.cached_outer_sample().clone();
        let g = assemble_direction(&state, &row, &f1, &h1);
        let mut plain = f1.clone();
        plain.axpy(row.eta, &h1);
        assert_eq!(g.as_slice(), plain.as_slice());
    }

    #[test]
    fn zero_theta_disables_extrapolation() {
        let problem = toy_problem(ToyConfig::monotone_1d()).unwrap();
        let schedule = flat_schedule(PolicyKind::MonotoneFixed, 8, 0.25, 0.5);
        let mut state = init_state(
            &problem,
            &schedule,
            &RunConfig::new(PolicyKind::MonotoneFixed, 8, 0),
        )
        .unwrap();
        step(&mut state, schedule.row(1), &problem).unwrap();
        let x = state.x_current().clone();
        let f = problem.inner.mean(&x);
        let h = problem.outer.mean(&x);
        let g = assemble_direction(&state, schedule.row(2), &f, &h);
        let mut expected = f.clone();
        expected.axpy(0.25, &h);
        assert_eq!(g.as_slice(), expected.as_slice());
    }

    #[test]
    fn hand_checked_extrapolated_direction() {
        // identity inner map, disabled regularization, full extrapolation:
        // g = 2 x_curr - x_prev elementwise.
        let problem = toy_problem(ToyConfig {
            n: 2,
            symmetric: 1.0,
            lower: -10.0,
            upper: 10.0,
            ..ToyConfig::deterministic_defaults(2)
        })
        .unwrap();
        let schedule = flat_schedule(PolicyKind::MonotoneFixed, 4, 0.0, 1.0);
        let mut config = RunConfig::new(PolicyKind::MonotoneFixed, 4, 0);
        config.start = Some(Point::zeros(2));
        let mut state = init_state(&problem, &schedule, &config).unwrap();
        // force the cached values to F(x_prev) at x_prev = (0,0)
        let row = ScheduleRow {
            k: 2,
            tau: 1.0,
            theta: 1.0,
            eta: 0.0,
            gamma: 1.0,
        };
        state.x_curr = Point::new(vec![1.0, 1.0]);
        let f_k = problem.inner.mean(&state.x_curr);
        let h_k = problem.outer.mean(&state.x_curr);
        let g = assemble_direction(&state, &row, &f_k, &h_k);
        assert_eq!(g.as_slice(), &[2.0, 2.0]);
    }

    #[test]
    fn plain_projected_step() {
        // F(x) = x on [-10,10]^2 with gamma = 1 sends (1, 0) to the origin.
        let problem = toy_problem(ToyConfig {
            n: 2,
            symmetric: 1.0,
            lower: -10.0,
            upper: 10.0,
            ..ToyConfig::deterministic_defaults(2)
        })
        .unwrap();
        let schedule = flat_schedule(PolicyKind::MonotoneFixed, 4, 0.0, 1.0);
        let mut config = RunConfig::new(PolicyKind::MonotoneFixed, 4, 0);
        config.start = Some(Point::new(vec![1.0, 0.0]));
        let mut state = init_state(&problem, &schedule, &config).unwrap();
        step(&mut state, schedule.row(1), &problem).unwrap();
        assert_eq!(state.x_current().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn averaging_matches_hand_computation() {
        let dim = 1;
        let mut state = SolverState {
            k: 1,
            x_curr: Point::zeros(dim),
            x_prev: Point::zeros(dim),
            f_prev: Point::zeros(dim),
            h_prev: Point::zeros(dim),
            eta_prev: 0.0,
            weighted_sum: Point::zeros(dim),
            weight_total: 0.0,
            batch_size: 1,
            stream_f: SeededStream::new(0, 0, OperatorTag::Inner),
            stream_h: SeededStream::new(0, 0, OperatorTag::Outer),
        };
        assert!(averaged_iterate(&state).is_err());

        // tau_1 = 2 weighting iterate 1, tau_2 = 3 weighting iterate 4
        state.weighted_sum.axpy(2.0, &Point::new(vec![1.0]));
        state.weight_total += 2.0;
        state.weighted_sum.axpy(3.0, &Point::new(vec![4.0]));
        state.weight_total += 3.0;
        let avg = averaged_iterate(&state).unwrap();
        assert!((avg[0] - 2.8).abs() < 1e-15);
    }

    #[test]
    fn uniform_average_of_three_iterates() {
        let mut state = SolverState {
            k: 1,
            x_curr: Point::zeros(2),
            x_prev: Point::zeros(2),
            f_prev: Point::zeros(2),
            h_prev: Point::zeros(2),
            eta_prev: 0.0,
            weighted_sum: Point::zeros(2),
            weight_total: 0.0,
            batch_size: 1,
            stream_f: SeededStream::new(0, 0, OperatorTag::Inner),
            stream_h: SeededStream::new(0, 0, OperatorTag::Outer),
        };
        for v in [0.0, 2.0, 4.0] {
            state.weighted_sum.axpy(1.0, &Point::new(vec![v, 0.0]));
            state.weight_total += 1.0;
        }
        assert_eq!(averaged_iterate(&state).unwrap().as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn run_is_deterministic_and_feasible() {
        let problem = nash_problem(false);
        let d_x = problem.set.require_radius().unwrap();
        let horizon = 1 << 10;
        let schedule = build_schedule(
            PolicyKind::MonotoneFixed,
            &problem.constants,
            d_x,
            horizon,
            None,
        )
        .unwrap();
        let config = RunConfig::new(PolicyKind::MonotoneFixed, horizon, 2024).with_replication(3);
        let a = run(&problem, &schedule, &config).unwrap();
        let b = run(&problem, &schedule, &config).unwrap();
        assert_eq!(a.final_average.as_slice(), b.final_average.as_slice());
        assert_eq!(a.checkpoints.len(), b.checkpoints.len());
        for (ca, cb) in a.checkpoints.iter().zip(&b.checkpoints) {
            assert_eq!(ca.step, cb.step);
            assert_eq!(ca.average.as_slice(), cb.average.as_slice());
            assert!(problem.set.distance(&ca.average).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn exactly_one_batch_and_one_sample_per_iteration() {
        let problem = nash_problem(false);
        let d_x = problem.set.require_radius().unwrap();
        let horizon = 257;
        let batch = 3;
        let schedule = build_schedule(
            PolicyKind::MonotoneFixed,
            &problem.constants,
            d_x,
            horizon,
            Some(batch),
        )
        .unwrap();
        let mut config = RunConfig::new(PolicyKind::MonotoneFixed, horizon, 5);
        config.batch_size = batch;
        problem.inner.reset_sample_count();
        problem.outer.reset_sample_count();
        run(&problem, &schedule, &config).unwrap();
        assert_eq!(
            problem.inner.samples_drawn(),
            ((horizon - 1) * batch) as u64
        );
        assert_eq!(problem.outer.samples_drawn(), (horizon - 1) as u64);
    }

    #[test]
    fn averaged_iterates_decrease_toward_the_known_solution() {
        // rotation about the lower corner with the outer target at the
        // origin: the bilevel solution is the origin
        let problem = toy_problem(ToyConfig {
            n: 2,
            rotation: 1.0,
            target: Some(vec![0.0, 0.0]),
            ..ToyConfig::deterministic_defaults(2)
        })
        .unwrap();
        let horizon = 10_001;
        let schedule = build_schedule(
            PolicyKind::MonotoneFixed,
            &problem.constants,
            problem.set.require_radius().unwrap(),
            horizon,
            None,
        )
        .unwrap();
        let mut config = RunConfig::new(PolicyKind::MonotoneFixed, horizon, 0);
        config.metric_cadence = Cadence::Every(100);
        let record = run(&problem, &schedule, &config).unwrap();
        let solution = Point::zeros(2);
        let dist_at = |step: usize| {
            record
                .checkpoints
                .iter()
                .find(|c| c.step == step)
                .unwrap()
                .average
                .distance_to(&solution)
        };
        let (d100, d1000, d10000) = (dist_at(100), dist_at(1000), dist_at(10000));
        assert!(d1000 <= 1.1 * d100, "{d100} -> {d1000}");
        assert!(d10000 <= 1.1 * d1000, "{d1000} -> {d10000}");
    }
}
