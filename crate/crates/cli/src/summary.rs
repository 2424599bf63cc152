//! CSV serialization of scored runs and across-replication aggregation.
//!
//! Per-replication files carry one checkpoint per line with a fixed schema;
//! aggregate files carry the across-replication mean and standard error of
//! every metric. Unsupported metrics serialize as `NA`. Values use the
//! shortest round-trip float format, so identical runs produce identical
//! bytes.

use std::path::PathBuf;

use ropex_core::{loglog_rate_fit, GapReport, MetricRow, Point, METRIC_COLUMNS};

use crate::config::Timing;
use crate::error::{CliError, Result};

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "NA".into(),
    }
}

/// Header + rows for one replication:
/// `k,wall_seconds,xbar_0..xbar_{n-1},<metrics>`.
pub fn run_csv(rows: &[MetricRow], dim: usize, timing: Timing) -> String {
    let mut out = String::from("k,wall_seconds");
    for i in 0..dim {
        out.push_str(&format!(",xbar_{i}"));
    }
    for m in METRIC_COLUMNS {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    for row in rows {
        let wall = match timing {
            Timing::None => 0.0,
            Timing::Wall => row.wall_seconds,
        };
        out.push_str(&format!("{},{}", row.step, wall));
        for v in row.average.as_slice() {
            out.push_str(&format!(",{v}"));
        }
        for v in row.metric_values() {
            out.push(',');
            out.push_str(&fmt_opt(v));
        }
        out.push('\n');
    }
    out
}

/// Parses a file produced by [`run_csv`].
pub fn parse_run_csv(text: &str) -> Result<Vec<MetricRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Other("empty run file".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let dim = columns.iter().filter(|c| c.starts_with("xbar_")).count();
    let expected = 2 + dim + METRIC_COLUMNS.len();
    if columns.len() != expected {
        return Err(CliError::Other(format!(
            "unexpected run file header: {header}"
        )));
    }
    let parse_opt = |tok: &str| -> Result<Option<f64>> {
        if tok == "NA" {
            Ok(None)
        } else {
            tok.parse::<f64>()
                .map(Some)
                .map_err(|_| CliError::Other(format!("bad number '{tok}' in run file")))
        }
    };
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != expected {
            return Err(CliError::Other("ragged run file row".into()));
        }
        let step: usize = toks[0]
            .parse()
            .map_err(|_| CliError::Other("bad step index in run file".into()))?;
        let wall: f64 = toks[1]
            .parse()
            .map_err(|_| CliError::Other("bad wall time in run file".into()))?;
        let coords: Vec<f64> = toks[2..2 + dim]
            .iter()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| CliError::Other("bad coordinate in run file".into()))?;
        let m = &toks[2 + dim..];
        rows.push(MetricRow {
            step,
            wall_seconds: wall,
            average: Point::new(coords),
            gaps: GapReport {
                dist_inner: parse_opt(m[0])?,
                feasibility_gap: parse_opt(m[1])?,
                optimality_gap: parse_opt(m[2])?,
                saddle_gap: parse_opt(m[3])?,
                outer_gap: parse_opt(m[4])?,
                lcp_phi: parse_opt(m[5])?,
                method: None,
            },
            iterate_drift: parse_opt(m[6])?,
        });
    }
    Ok(rows)
}

/// Across-replication mean and standard error at one checkpoint.
#[derive(Clone, Debug)]
pub struct AggregateRow {
    pub step: usize,
    pub mean_wall: f64,
    pub stderr_wall: f64,
    pub means: [Option<f64>; 7],
    pub stderrs: [Option<f64>; 7],
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregates matching checkpoint grids across replications.
pub fn aggregate(per_rep: &[Vec<MetricRow>]) -> Result<Vec<AggregateRow>> {
    let first = per_rep
        .first()
        .ok_or_else(|| CliError::Other("no replications to aggregate".into()))?;
    let grid: Vec<usize> = first.iter().map(|r| r.step).collect();
    for rep in per_rep {
        let this: Vec<usize> = rep.iter().map(|r| r.step).collect();
        if this != grid {
            return Err(CliError::Other(
                "replications have mismatched checkpoint grids".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(grid.len());
    for (i, step) in grid.iter().enumerate() {
        let walls: Vec<f64> = per_rep.iter().map(|rep| rep[i].wall_seconds).collect();
        let (mean_wall, stderr_wall) = mean_stderr(&walls);
        let mut means = [None; 7];
        let mut stderrs = [None; 7];
        for m in 0..METRIC_COLUMNS.len() {
            let values: Vec<Option<f64>> = per_rep
                .iter()
                .map(|rep| rep[i].metric_values()[m])
                .collect();
            if values.iter().all(|v| v.is_some()) {
                let vals: Vec<f64> = values.into_iter().map(|v| v.unwrap()).collect();
                let (mean, stderr) = mean_stderr(&vals);
                means[m] = Some(mean);
                stderrs[m] = Some(stderr);
            }
        }
        out.push(AggregateRow {
            step: *step,
            mean_wall,
            stderr_wall,
            means,
            stderrs,
        });
    }
    Ok(out)
}

pub fn aggregate_csv(rows: &[AggregateRow], timing: Timing) -> String {
    let mut out = String::from("k,mean_wall_seconds,stderr_wall_seconds");
    for m in METRIC_COLUMNS {
        out.push_str(&format!(",mean_{m},stderr_{m}"));
    }
    out.push('\n');
    for row in rows {
        let (w, sw) = match timing {
            Timing::None => (0.0, 0.0),
            Timing::Wall => (row.mean_wall, row.stderr_wall),
        };
        out.push_str(&format!("{},{w},{sw}", row.step));
        for m in 0..METRIC_COLUMNS.len() {
            out.push(',');
            out.push_str(&fmt_opt(row.means[m]));
            out.push(',');
            out.push_str(&fmt_opt(row.stderrs[m]));
        }
        out.push('\n');
    }
    out
}

/// Result of re-aggregating persisted replication files.
#[derive(Clone, Debug)]
pub struct SummarizedFiles {
    pub rows: Vec<AggregateRow>,
    /// Per-metric log-log slope of the mean value against the checkpoint
    /// index, for metrics with at least three positive checkpoints.
    pub slopes: Vec<(&'static str, f64, f64)>,
}

/// Reads replication files back and recomputes the aggregate and the
/// within-run rate fits.
pub fn summarize(paths: &[PathBuf]) -> Result<SummarizedFiles> {
    if paths.is_empty() {
        return Err(CliError::Other("no run files to summarize".into()));
    }
    let mut per_rep = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        per_rep.push(parse_run_csv(&text)?);
    }
    let rows = aggregate(&per_rep)?;
    let slopes = fit_slopes(&rows);
    Ok(SummarizedFiles { rows, slopes })
}

/// Log-log fits of mean metric values against the checkpoint index.
pub fn fit_slopes(rows: &[AggregateRow]) -> Vec<(&'static str, f64, f64)> {
    let mut out = Vec::new();
    for (m, name) in METRIC_COLUMNS.iter().enumerate() {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| match r.means[m] {
                Some(v) if v > 0.0 => Some((r.step as f64, v)),
                _ => None,
            })
            .collect();
        if points.len() >= 3 {
            if let Ok((slope, intercept)) = loglog_rate_fit(&points) {
                out.push((*name, slope, intercept));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(step: usize, value: f64) -> MetricRow {
        MetricRow {
            step,
            wall_seconds: 0.5,
            average: Point::new(vec![value, 0.0]),
            gaps: GapReport {
                dist_inner: Some(value),
                feasibility_gap: None,
                optimality_gap: Some(-value),
                saddle_gap: None,
                outer_gap: None,
                lcp_phi: None,
                method: None,
            },
            iterate_drift: if step > 1 { Some(0.1) } else { None },
        }
    }

    #[test]
    fn single_replication_aggregates_to_itself() {
        let reps = vec![vec![row(1, 2.0), row(2, 1.0)]];
        let agg = aggregate(&reps).unwrap();
        assert_eq!(agg.len(), 2);
        assert_eq!(agg[0].means[0], Some(2.0));
        assert_eq!(agg[0].stderrs[0], Some(0.0));
        // a metric absent in any replication stays absent
        assert_eq!(agg[0].means[1], None);
        // drift is absent at the first checkpoint only
        assert_eq!(agg[0].means[6], None);
        assert_eq!(agg[1].means[6], Some(0.1));
    }

    #[test]
    fn two_symmetric_replications_average_to_the_center() {
        let a = vec![row(1, 1.0)];
        let b = vec![row(1, 3.0)];
        let agg = aggregate(&[a, b]).unwrap();
        assert_eq!(agg[0].means[0], Some(2.0));
        let stderr = agg[0].stderrs[0].unwrap();
        assert!((stderr - 1.0).abs() < 1e-12); // sd = sqrt(2), stderr = 1
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = vec![row(1, 1.0), row(2, 1.0)];
        let b = vec![row(1, 1.0), row(4, 1.0)];
        assert!(aggregate(&[a, b]).is_err());
    }

    #[test]
    fn run_csv_round_trips() {
        let rows = vec![row(1, 2.0), row(2, 1.0)];
        let text = run_csv(&rows, 2, Timing::Wall);
        assert!(text.starts_with(
            "k,wall_seconds,xbar_0,xbar_1,dist_inner,feasibility_gap,optimality_gap,saddle_gap,outer_gap,lcp_phi,iterate_drift"
        ));
        let parsed = parse_run_csv(&text).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].step, 1);
        assert_eq!(parsed[0].wall_seconds, 0.5);
        assert_eq!(parsed[0].average.as_slice(), &[2.0, 0.0]);
        assert_eq!(parsed[0].gaps.dist_inner, Some(2.0));
        assert_eq!(parsed[0].gaps.feasibility_gap, None);
        assert_eq!(parsed[1].iterate_drift, Some(0.1));
    }

    #[test]
    fn timing_none_zeroes_the_wall_column() {
        let rows = vec![row(1, 2.0)];
        let text = run_csv(&rows, 2, Timing::None);
        let parsed = parse_run_csv(&text).unwrap();
        assert_eq!(parsed[0].wall_seconds, 0.0);
    }

    #[test]
    fn slope_fit_recovers_synthetic_power_laws() {
        let rows: Vec<AggregateRow> = (1..=6)
            .map(|i| {
                let step = 1usize << i;
                let mut means = [None; 7];
                means[0] = Some(2.0 * (step as f64).powf(-0.5));
                AggregateRow {
                    step,
                    mean_wall: 0.0,
                    stderr_wall: 0.0,
                    means,
                    stderrs: [None; 7],
                }
            })
            .collect();
        let slopes = fit_slopes(&rows);
        assert_eq!(slopes.len(), 1);
        assert_eq!(slopes[0].0, "dist_inner");
        assert!((slopes[0].1 + 0.5).abs() < 1e-9);
    }
}
