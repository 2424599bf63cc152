//! Experiment orchestration: build the problem and schedule, gate on the
//! schedule-validity conditions, run seeded replications (in parallel when
//! asked), score them, and persist plot-ready artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use ropex_core::{
    build_schedule, reference_solution, score_run, theoretical_bounds, validate_conditions,
    BoundReport, MetricRow, Point, ProblemInstance, RunConfig, Schedule, METRIC_COLUMNS,
};

use crate::config::{ExperimentConfig, Timing};
use crate::error::{CliError, Result};
use crate::summary::{aggregate, aggregate_csv, fit_slopes, run_csv, AggregateRow};

/// Iteration budget and tolerance for the traffic reference solver.
const REFERENCE_BUDGET: usize = 4_000_000;
const REFERENCE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct KSummary {
    pub horizon: usize,
    pub aggregate: Vec<AggregateRow>,
    pub bounds: Option<BoundReport>,
    /// Minimal horizon the strongly monotone conditions need, when reported.
    pub min_admissible_horizon: Option<usize>,
    /// Within-run rate fits (mean metric value against checkpoint index).
    pub checkpoint_slopes: Vec<(&'static str, f64, f64)>,
}

impl KSummary {
    pub fn final_row(&self) -> &AggregateRow {
        self.aggregate.last().expect("nonempty aggregate")
    }
}

#[derive(Clone, Debug)]
pub struct SummaryReport {
    pub config_echo: String,
    pub problem_name: String,
    pub per_k: Vec<KSummary>,
    /// Across-horizon rate fits of the final-checkpoint means.
    pub sweep_slopes: Vec<(&'static str, f64, f64)>,
    pub reference_residual: Option<f64>,
    pub total_wall_seconds: f64,
    pub out_dir: Option<PathBuf>,
}

impl SummaryReport {
    pub fn for_horizon(&self, k: usize) -> Option<&KSummary> {
        self.per_k.iter().find(|s| s.horizon == k)
    }

    pub fn sweep_slope(&self, metric: &str) -> Option<f64> {
        self.sweep_slopes
            .iter()
            .find(|(m, _, _)| *m == metric)
            .map(|(_, s, _)| *s)
    }

    /// Human-readable summary; wall totals appear only under wall timing so
    /// the persisted file stays deterministic otherwise.
    pub fn render(&self, timing: Timing) -> String {
        let mut out = String::new();
        out.push_str(&format!("problem = {}\n", self.problem_name));
        if let Some(res) = self.reference_residual {
            out.push_str(&format!("reference_residual = {res:.3e}\n"));
        }
        for ks in &self.per_k {
            out.push_str(&format!("\n[k = {}]\n", ks.horizon));
            if let Some(min) = ks.min_admissible_horizon {
                out.push_str(&format!("min_admissible_horizon = {min}\n"));
            }
            if let Some(b) = &ks.bounds {
                for (name, value) in b.fields() {
                    out.push_str(&format!("bound {name} = {value:.6e}\n"));
                }
            }
            let last = ks.final_row();
            out.push_str(&format!("final_step = {}\n", last.step));
            for (m, name) in METRIC_COLUMNS.iter().enumerate() {
                if let (Some(mean), Some(stderr)) = (last.means[m], last.stderrs[m]) {
                    out.push_str(&format!(
                        "final {name} mean = {mean:.6e} stderr = {stderr:.6e}\n"
                    ));
                }
            }
            for (name, slope, _) in &ks.checkpoint_slopes {
                out.push_str(&format!("checkpoint_slope {name} = {slope:.4}\n"));
            }
        }
        if self.per_k.len() >= 3 {
            out.push_str("\n[sweep]\n");
            for (name, slope, intercept) in &self.sweep_slopes {
                out.push_str(&format!(
                    "sweep_slope {name} = {slope:.4} intercept = {intercept:.4}\n"
                ));
            }
        }
        if timing == Timing::Wall {
            out.push_str(&format!(
                "\nwall_total_seconds = {}\n",
                self.total_wall_seconds
            ));
        }
        out
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn run_replications(
    problem: &ProblemInstance,
    schedule: &Schedule,
    config: &ExperimentConfig,
    horizon: usize,
) -> Result<Vec<Vec<MetricRow>>> {
    let base = RunConfig {
        horizon,
        policy: config.policy,
        batch_size: schedule.batch_size,
        metric_cadence: config.cadence,
        seed: config.seed,
        replication: 0,
        start: config.start.clone().map(Point::new),
    };
    let replicate = |rep: usize| -> Result<Vec<MetricRow>> {
        let mut rc = base.clone();
        rc.replication = rep as u64;
        let record = ropex_core::run(problem, schedule, &rc)?;
        Ok(score_run(problem, &record))
    };
    let work = || -> Result<Vec<Vec<MetricRow>>> {
        (0..config.replications)
            .into_par_iter()
            .map(replicate)
            .collect()
    };
    if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| CliError::Other(format!("worker pool: {e}")))?;
        pool.install(work)
    } else {
        work()
    }
}

/// Runs the full experiment described by the configuration and persists
/// per-replication files, aggregates, a sweep table, the canonical config
/// echo, and a summary under the output directory (when one is set).
pub fn run_experiment(config: &ExperimentConfig) -> Result<SummaryReport> {
    config.validate()?;
    let clock = Instant::now();
    let mut problem = config.build_problem()?;

    // problems without analytic references get a computed one up front
    let mut reference_residual = None;
    if config.problem.is_traffic() {
        let reference = reference_solution(&problem, REFERENCE_BUDGET, REFERENCE_TOL)?;
        reference_residual = Some(reference.bilevel_residual);
        problem.attach_reference(reference.bilevel, reference.bilevel_residual);
    }

    let d_x = problem.set.require_radius()?;
    let d_inner = problem
        .references
        .inner_solution_set
        .as_ref()
        .and_then(|s| s.radius());

    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }

    let mut per_k = Vec::with_capacity(config.k_sweep.len());
    for &horizon in &config.k_sweep {
        let schedule = build_schedule(
            config.policy,
            &problem.constants,
            d_x,
            horizon,
            config.batch,
        )?;
        let validation = validate_conditions(config.policy, &schedule.rows, &problem.constants);
        if !validation.passed {
            let (cond, k) = validation.first_violation().expect("failed validation");
            return Err(CliError::Schedule(format!(
                "policy {} violates '{}' first at iteration {k} (horizon {horizon})",
                config.policy,
                cond.name()
            )));
        }

        let scored = run_replications(&problem, &schedule, config, horizon)?;
        let agg = aggregate(&scored)?;

        if let Some(dir) = &config.out_dir {
            for (rep, rows) in scored.iter().enumerate() {
                let path = dir.join(format!("run_k{horizon}_rep{rep}.csv"));
                write_file(&path, &run_csv(rows, problem.dim(), config.timing))?;
            }
            let path = dir.join(format!("aggregate_k{horizon}.csv"));
            write_file(&path, &aggregate_csv(&agg, config.timing))?;
            let mut schedule_text = Vec::new();
            schedule
                .write_csv(&mut schedule_text)
                .map_err(|e| CliError::Other(format!("schedule csv: {e}")))?;
            write_file(
                &dir.join(format!("schedule_k{horizon}.csv")),
                &String::from_utf8(schedule_text).expect("ascii csv"),
            )?;
        }

        let bounds = problem.constants.c_h.and_then(|c_h| {
            theoretical_bounds(
                config.policy,
                &problem.constants,
                d_x,
                c_h,
                d_inner,
                horizon,
            )
            .ok()
        });
        let checkpoint_slopes = fit_slopes(&agg);
        per_k.push(KSummary {
            horizon,
            aggregate: agg,
            bounds,
            min_admissible_horizon: validation.min_admissible_horizon,
            checkpoint_slopes,
        });
    }

    // across-horizon fits on the final checkpoint of each run
    let mut sweep_slopes = Vec::new();
    for (m, name) in METRIC_COLUMNS.iter().enumerate() {
        let points: Vec<(f64, f64)> = per_k
            .iter()
            .filter_map(|ks| match ks.final_row().means[m] {
                Some(v) if v > 0.0 => Some((ks.horizon as f64, v)),
                _ => None,
            })
            .collect();
        if points.len() >= 3 {
            if let Ok((slope, intercept)) = ropex_core::loglog_rate_fit(&points) {
                sweep_slopes.push((*name, slope, intercept));
            }
        }
    }

    let report = SummaryReport {
        config_echo: config.echo(),
        problem_name: problem.name.clone(),
        per_k,
        sweep_slopes,
        reference_residual,
        total_wall_seconds: clock.elapsed().as_secs_f64(),
        out_dir: config.out_dir.clone(),
    };

    if let Some(dir) = &config.out_dir {
        write_file(&dir.join("config.echo"), &report.config_echo)?;
        write_file(&dir.join("summary.txt"), &report.render(config.timing))?;
        write_file(&dir.join("sweep.csv"), &sweep_csv(&report))?;
    }
    Ok(report)
}

/// One row per horizon with the final-checkpoint means, plot-ready.
fn sweep_csv(report: &SummaryReport) -> String {
    let mut out = String::from("k");
    for m in METRIC_COLUMNS {
        out.push_str(&format!(",final_mean_{m}"));
    }
    out.push('\n');
    for ks in &report.per_k {
        out.push_str(&ks.horizon.to_string());
        let last = ks.final_row();
        for m in 0..METRIC_COLUMNS.len() {
            out.push(',');
            match last.means[m] {
                Some(v) => out.push_str(&format!("{v}")),
                None => out.push_str("NA"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemId;
    use ropex_core::PolicyKind;

    #[test]
    fn incompatible_policy_is_a_config_error() {
        // merely monotone problem with a strongly monotone policy
        let cfg = ExperimentConfig::new(ProblemId::Nash, PolicyKind::StronglyMonotone, 64);
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("mu_h"), "{err}");
    }

    #[test]
    fn small_experiment_produces_a_summary() {
        let mut cfg = ExperimentConfig::new(ProblemId::Nash, PolicyKind::MonotoneFixed, 64);
        cfg.replications = 2;
        cfg.seed = 7;
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.per_k.len(), 1);
        let ks = &report.per_k[0];
        assert!(ks.final_row().means[0].unwrap() >= 0.0); // dist_inner
        assert!(ks.bounds.is_some());
        // averaged iterates stay in the box
        assert!(ks.final_row().means[4].unwrap() >= -1e-9); // outer_gap
    }

    #[test]
    fn deterministic_given_seed_and_config() {
        let mut cfg = ExperimentConfig::new(ProblemId::Nash, PolicyKind::MonotoneFixed, 128);
        cfg.replications = 3;
        cfg.seed = 11;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        for (ka, kb) in a.per_k.iter().zip(&b.per_k) {
            for (ra, rb) in ka.aggregate.iter().zip(&kb.aggregate) {
                assert_eq!(ra.means, rb.means);
                assert_eq!(ra.stderrs, rb.stderrs);
            }
        }
    }
}
