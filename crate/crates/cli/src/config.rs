//! Flat, line-oriented `key = value` experiment configuration. The echoed
//! form is canonical: every resolved field appears, so re-running from an
//! echo reproduces the experiment and diffs stay trivial.

use std::path::{Path, PathBuf};

use ropex_core::{
    nash_problem, toy_problem, traffic_problem_from_network, Cadence, PolicyKind, ProblemInstance,
    ToyConfig, TrafficNetwork, DEFAULT_CAP_BOX, DEFAULT_MU_REG,
};

use crate::error::{CliError, Result};

/// Built-in problem identifiers accepted by the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemId {
    Nash,
    NashStrong,
    Traffic,
    TrafficStrong,
    ToyRotation,
    ToyDrift,
}

impl ProblemId {
    pub const ALL: [ProblemId; 6] = [
        ProblemId::Nash,
        ProblemId::NashStrong,
        ProblemId::Traffic,
        ProblemId::TrafficStrong,
        ProblemId::ToyRotation,
        ProblemId::ToyDrift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Nash => "nash",
            ProblemId::NashStrong => "nash-strong",
            ProblemId::Traffic => "traffic",
            ProblemId::TrafficStrong => "traffic-strong",
            ProblemId::ToyRotation => "toy-rotation",
            ProblemId::ToyDrift => "toy-drift",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown problem '{name}'; expected one of: {}",
                    ProblemId::ALL.map(|p| p.name()).join(", ")
                ))
            })
    }

    pub fn is_traffic(self) -> bool {
        matches!(self, ProblemId::Traffic | ProblemId::TrafficStrong)
    }
}

impl std::fmt::Display for ProblemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether per-checkpoint wall-clock times are persisted. `None` writes
/// zeros so that identical configurations produce byte-identical artifacts;
/// `Wall` opts into real timings for time-axis plots at the cost of that
/// reproducibility.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Timing {
    #[default]
    None,
    Wall,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub policy: PolicyKind,
    pub k_sweep: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub cadence: Cadence,
    pub batch: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub workers: usize,
    pub timing: Timing,
    pub start: Option<Vec<f64>>,
    pub cap_box: f64,
    pub mu_reg: f64,
    pub network: Option<PathBuf>,
    /// Overrides applied to the problem constants after construction,
    /// written as `const.<field> = <value>` lines.
    pub const_overrides: Vec<(String, f64)>,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemId, policy: PolicyKind, horizon: usize) -> Self {
        ExperimentConfig {
            problem,
            policy,
            k_sweep: vec![horizon],
            replications: 1,
            seed: 0,
            cadence: Cadence::Geometric,
            batch: None,
            out_dir: None,
            workers: 0,
            timing: Timing::None,
            start: None,
            cap_box: DEFAULT_CAP_BOX,
            mu_reg: DEFAULT_MU_REG,
            network: None,
            const_overrides: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_sweep.is_empty() {
            return Err(CliError::Config("k sweep must be nonempty".into()));
        }
        if self.k_sweep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(
                "k sweep values must be strictly increasing".into(),
            ));
        }
        if self.k_sweep.iter().any(|k| *k < 2) {
            return Err(CliError::Config("every horizon must be at least 2".into()));
        }
        if self.replications == 0 {
            return Err(CliError::Config("replications must be at least 1".into()));
        }
        if let Cadence::Every(m) = self.cadence {
            if m == 0 {
                return Err(CliError::Config("cadence must be positive".into()));
            }
            if m > *self.k_sweep.last().unwrap() {
                return Err(CliError::Config(
                    "cadence exceeds the largest horizon".into(),
                ));
            }
        }
        if !(self.cap_box > 0.0) {
            return Err(CliError::Config("cap_box must be positive".into()));
        }
        if !(self.mu_reg > 0.0) {
            return Err(CliError::Config("mu_reg must be positive".into()));
        }
        Ok(())
    }

    /// Builds the problem instance, applying network/cap/regularization
    /// options and any constant overrides.
    pub fn build_problem(&self) -> Result<ProblemInstance> {
        let mut problem = match self.problem {
            ProblemId::Nash => nash_problem(false),
            ProblemId::NashStrong => nash_problem(true),
            ProblemId::Traffic | ProblemId::TrafficStrong => {
                let network = match &self.network {
                    Some(path) => TrafficNetwork::from_file(path)?,
                    None => TrafficNetwork::five_node(),
                };
                traffic_problem_from_network(
                    network,
                    self.problem == ProblemId::TrafficStrong,
                    Some(self.mu_reg),
                    self.cap_box,
                )?
            }
            ProblemId::ToyRotation => toy_problem(ToyConfig::interior_rotation_2d())?,
            ProblemId::ToyDrift => toy_problem(ToyConfig::sharp_drift_1d())?,
        };
        for (field, value) in &self.const_overrides {
            apply_override(&mut problem, field, *value)?;
        }
        problem.constants.validate()?;
        Ok(problem)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut problem = None;
        let mut policy = None;
        let mut config = ExperimentConfig::new(ProblemId::Nash, PolicyKind::MonotoneFixed, 2);
        config.k_sweep = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected 'key = value'", ln + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| CliError::Config(format!("line {}: {what}", ln + 1));
            match key {
                "problem" => problem = Some(ProblemId::parse(value)?),
                "policy" => {
                    policy = Some(
                        PolicyKind::parse(value).map_err(|e| CliError::Config(e.to_string()))?,
                    )
                }
                "k" | "k_sweep" => {
                    config.k_sweep = value
                        .split(',')
                        .map(|t| t.trim().parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("expected comma-separated integers"))?;
                }
                "reps" => {
                    config.replications = value.parse().map_err(|_| bad("expected an integer"))?
                }
                "seed" => config.seed = value.parse().map_err(|_| bad("expected an integer"))?,
                "cadence" => {
                    config.cadence = if value == "pow2" {
                        Cadence::Geometric
                    } else {
                        Cadence::Every(
                            value
                                .parse()
                                .map_err(|_| bad("expected pow2 or an integer"))?,
                        )
                    }
                }
                "batch" => {
                    config.batch = if value == "auto" {
                        None
                    } else {
                        Some(
                            value
                                .parse()
                                .map_err(|_| bad("expected auto or an integer"))?,
                        )
                    }
                }
                "out" => config.out_dir = Some(PathBuf::from(value)),
                "workers" => {
                    config.workers = value.parse().map_err(|_| bad("expected an integer"))?
                }
                "timing" => {
                    config.timing = match value {
                        "none" => Timing::None,
                        "wall" => Timing::Wall,
                        _ => return Err(bad("expected none or wall")),
                    }
                }
                "start" => {
                    config.start = Some(
                        value
                            .split(',')
                            .map(|t| t.trim().parse::<f64>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| bad("expected comma-separated numbers"))?,
                    )
                }
                "cap_box" => {
                    config.cap_box = value.parse().map_err(|_| bad("expected a number"))?
                }
                "mu_reg" => config.mu_reg = value.parse().map_err(|_| bad("expected a number"))?,
                "network" => config.network = Some(PathBuf::from(value)),
                _ if key.starts_with("const.") => {
                    let field = key.trim_start_matches("const.").to_string();
                    let v: f64 = value.parse().map_err(|_| bad("expected a number"))?;
                    config.const_overrides.push((field, v));
                }
                other => return Err(bad(&format!("unknown key '{other}'"))),
            }
        }
        config.problem =
            problem.ok_or_else(|| CliError::Config("missing required key 'problem'".into()))?;
        config.policy =
            policy.ok_or_else(|| CliError::Config("missing required key 'policy'".into()))?;
        if config.k_sweep.is_empty() {
            return Err(CliError::Config("missing required key 'k'".into()));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Canonical echo with every resolved value.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("problem = {}\n", self.problem));
        out.push_str(&format!("policy = {}\n", self.policy));
        out.push_str(&format!(
            "k_sweep = {}\n",
            self.k_sweep
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        out.push_str(&format!("reps = {}\n", self.replications));
        out.push_str(&format!("seed = {}\n", self.seed));
        match self.cadence {
            Cadence::Geometric => out.push_str("cadence = pow2\n"),
            Cadence::Every(m) => out.push_str(&format!("cadence = {m}\n")),
        }
        match self.batch {
            None => out.push_str("batch = auto\n"),
            Some(b) => out.push_str(&format!("batch = {b}\n")),
        }
        if let Some(dir) = &self.out_dir {
            out.push_str(&format!("out = {}\n", dir.display()));
        }
        out.push_str(&format!("workers = {}\n", self.workers));
        out.push_str(&format!(
            "timing = {}\n",
            match self.timing {
                Timing::None => "none",
                Timing::Wall => "wall",
            }
        ));
        if let Some(start) = &self.start {
            out.push_str(&format!(
                "start = {}\n",
                start
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ));
        }
        if self.problem.is_traffic() {
            out.push_str(&format!("cap_box = {}\n", self.cap_box));
            out.push_str(&format!("mu_reg = {}\n", self.mu_reg));
            if let Some(net) = &self.network {
                out.push_str(&format!("network = {}\n", net.display()));
            }
        }
        for (field, value) in &self.const_overrides {
            out.push_str(&format!("const.{field} = {value}\n"));
        }
        out
    }
}

fn apply_override(problem: &mut ProblemInstance, field: &str, value: f64) -> Result<()> {
    let c = &mut problem.constants;
    match field {
        "l_f" => c.l_f = value,
        "m_f" => c.m_f = value,
        "l_h" => c.l_h = value,
        "m_h" => c.m_h = value,
        "sigma_f" => c.sigma_f = value,
        "sigma_h" => c.sigma_h = value,
        "mu_h" => c.mu_h = value,
        "c_f" => c.c_f = Some(value),
        "c_h" => c.c_h = Some(value),
        "b_f" => c.b_f = Some(value),
        "b_h" => c.b_h = Some(value),
        "alpha" => c.alpha = Some(value),
        "h_at_xstar_norm" => c.h_at_xstar_norm = Some(value),
        "radius" => {
            problem.set = problem
                .set
                .clone()
                .with_radius(value)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown constant override 'const.{other}'"
            )))
        }
    }
    Ok(())
}
