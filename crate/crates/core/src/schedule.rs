use std::io::Write;

use crate::constants::ProblemConstants;
use crate::error::{CoreError, Result};

/// The analyzed step-size regimes. Each one fixes how the per-iteration
/// parameters `(tau_k, theta_k, eta_k, gamma_k)` are generated from the
/// problem constants, the half-diameter `d_x`, and the horizon `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// Constant parameters for a merely monotone problem.
    MonotoneFixed,
    /// Constant parameters with the regularization weight pinned from the
    /// weak-sharpness modulus instead of the horizon.
    WeakSharp,
    /// Growing averaging weights for a strongly monotone outer operator.
    StronglyMonotone,
    /// Strongly monotone weights combined with the weak-sharp eta.
    StronglyMonotoneWeakSharp,
    /// Per-iteration decaying parameters that never read the horizon.
    AdaptiveKFree,
    /// Smooth stochastic inner operator; the inner oracle is mini-batched.
    SmoothStochasticMiniBatch,
    /// Smooth deterministic inner operator.
    SmoothDeterministic,
    /// Smooth deterministic inner operator, strongly monotone outer.
    SmoothDeterministicStronglyMonotone,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 8] = [
        PolicyKind::MonotoneFixed,
        PolicyKind::WeakSharp,
        PolicyKind::StronglyMonotone,
        PolicyKind::StronglyMonotoneWeakSharp,
        PolicyKind::AdaptiveKFree,
        PolicyKind::SmoothStochasticMiniBatch,
        PolicyKind::SmoothDeterministic,
        PolicyKind::SmoothDeterministicStronglyMonotone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::MonotoneFixed => "monotone-fixed",
            PolicyKind::WeakSharp => "weak-sharp",
            PolicyKind::StronglyMonotone => "strongly-monotone",
            PolicyKind::StronglyMonotoneWeakSharp => "strongly-monotone-weak-sharp",
            PolicyKind::AdaptiveKFree => "adaptive-k-free",
            PolicyKind::SmoothStochasticMiniBatch => "smooth-stochastic-mini-batch",
            PolicyKind::SmoothDeterministic => "smooth-deterministic",
            PolicyKind::SmoothDeterministicStronglyMonotone => {
                "smooth-deterministic-strongly-monotone"
            }
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                CoreError::InvalidArgument(format!(
                    "unknown policy '{name}'; expected one of: {}",
                    PolicyKind::ALL.map(|p| p.name()).join(", ")
                ))
            })
    }

    pub fn is_strongly_monotone(self) -> bool {
        matches!(
            self,
            PolicyKind::StronglyMonotone
                | PolicyKind::StronglyMonotoneWeakSharp
                | PolicyKind::SmoothDeterministicStronglyMonotone
        )
    }

    pub fn is_weak_sharp(self) -> bool {
        matches!(
            self,
            PolicyKind::WeakSharp | PolicyKind::StronglyMonotoneWeakSharp
        )
    }

    pub fn is_smooth(self) -> bool {
        matches!(
            self,
            PolicyKind::SmoothStochasticMiniBatch
                | PolicyKind::SmoothDeterministic
                | PolicyKind::SmoothDeterministicStronglyMonotone
        )
    }

    /// Checks the constants a policy needs before any formula is evaluated.
    pub fn check_requirements(self, constants: &ProblemConstants) -> Result<()> {
        constants.validate()?;
        if self.is_weak_sharp() {
            constants.require_alpha(self)?;
            constants.require_h_at_xstar_norm(self)?;
        }
        if self.is_strongly_monotone() {
            constants.require_strongly_monotone(self)?;
        }
        if self.is_smooth() && constants.m_f != 0.0 {
            return Err(CoreError::IncompatiblePolicy {
                policy: self,
                reason: format!(
                    "smooth policies require m_f = 0, problem has m_f = {}",
                    constants.m_f
                ),
            });
        }
        if matches!(
            self,
            PolicyKind::SmoothDeterministic | PolicyKind::SmoothDeterministicStronglyMonotone
        ) && constants.sigma_f != 0.0
        {
            return Err(CoreError::IncompatiblePolicy {
                policy: self,
                reason: format!(
                    "deterministic-inner policies require sigma_f = 0, problem has sigma_f = {}",
                    constants.sigma_f
                ),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One iteration's parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleRow {
    pub k: usize,
    pub tau: f64,
    pub theta: f64,
    pub eta: f64,
    pub gamma: f64,
}

/// A realized parameter sequence for iterations `1..=horizon-1`, immutable
/// after construction.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub policy: PolicyKind,
    pub horizon: usize,
    /// Mini-batch size applied to the inner oracle (1 unless mini-batching).
    pub batch_size: usize,
    pub rows: Vec<ScheduleRow>,
}

impl Schedule {
    pub fn row(&self, k: usize) -> &ScheduleRow {
        &self.rows[k - 1]
    }

    /// CSV with columns `k,tau,theta,eta,gamma`, for audit.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,tau,theta,eta,gamma")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.k, r.tau, r.theta, r.eta, r.gamma)?;
        }
        Ok(())
    }
}

/// The composite second-moment term appearing under every square root:
/// `m_f^2 + 2 sigma_f^2 + eta^2 (m_h^2 + 2 sigma_h^2)`.
pub(crate) fn noise_term(c: &ProblemConstants, eta: f64) -> f64 {
    c.m_f * c.m_f
        + 2.0 * c.sigma_f * c.sigma_f
        + eta * eta * (c.m_h * c.m_h + 2.0 * c.sigma_h * c.sigma_h)
}

/// The constant regularization weight each fixed policy uses.
pub(crate) fn policy_eta(policy: PolicyKind, c: &ProblemConstants, horizon: usize) -> Result<f64> {
    let k = horizon as f64;
    Ok(match policy {
        PolicyKind::MonotoneFixed | PolicyKind::StronglyMonotone => k.powf(-0.25),
        PolicyKind::WeakSharp | PolicyKind::StronglyMonotoneWeakSharp => {
            let alpha = c.require_alpha(policy)?;
            let h_norm = c.require_h_at_xstar_norm(policy)?;
            if h_norm == 0.0 {
                return Err(CoreError::InvalidArgument(
                    "weak-sharp eta is undefined when the outer operator vanishes at the solution"
                        .into(),
                ));
            }
            alpha / (2.0 * h_norm)
        }
        PolicyKind::SmoothStochasticMiniBatch
        | PolicyKind::SmoothDeterministic
        | PolicyKind::SmoothDeterministicStronglyMonotone => k.powf(-0.5),
        PolicyKind::AdaptiveKFree => {
            return Err(CoreError::InvalidArgument(
                "the adaptive policy has no constant eta".into(),
            ))
        }
    })
}

fn gamma_from_denominator(d_x: f64, denom: f64) -> Result<f64> {
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "step size undefined: denominator {denom} (all moduli zero?)"
        )));
    }
    Ok(d_x / denom)
}

/// Builds the parameter sequence for iterations `1..=horizon-1`.
///
/// `batch` is only meaningful for the mini-batching policy, where it defaults
/// to the horizon itself; every other policy runs single-sample.
pub fn build_schedule(
    policy: PolicyKind,
    constants: &ProblemConstants,
    d_x: f64,
    horizon: usize,
    batch: Option<usize>,
) -> Result<Schedule> {
    build_schedule_with_eta(policy, constants, d_x, horizon, batch, None)
}

/// Same as [`build_schedule`] but allows overriding the constant eta of the
/// weak-sharp policies (their formula is an upper bound, not an equality).
pub fn build_schedule_with_eta(
    policy: PolicyKind,
    constants: &ProblemConstants,
    d_x: f64,
    horizon: usize,
    batch: Option<usize>,
    eta_override: Option<f64>,
) -> Result<Schedule> {
    policy.check_requirements(constants)?;
    if horizon < 2 {
        return Err(CoreError::InvalidArgument(format!(
            "horizon must be at least 2, got {horizon}"
        )));
    }
    if !(d_x > 0.0) || !d_x.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "d_x must be positive and finite, got {d_x}"
        )));
    }
    if let Some(eta) = eta_override {
        if !policy.is_weak_sharp() {
            return Err(CoreError::InvalidArgument(
                "eta overrides are only supported for the weak-sharp policies".into(),
            ));
        }
        if !(eta > 0.0) {
            return Err(CoreError::InvalidArgument(
                "eta override must be positive".into(),
            ));
        }
    }

    let c = constants;
    let k_f = horizon as f64;
    let batch_size = match policy {
        PolicyKind::SmoothStochasticMiniBatch => batch.unwrap_or(horizon),
        _ => batch.unwrap_or(1),
    };
    if batch_size == 0 {
        return Err(CoreError::InvalidArgument("batch size must be >= 1".into()));
    }

    let mut rows = Vec::with_capacity(horizon - 1);
    match policy {
        PolicyKind::AdaptiveKFree => {
            // The horizon only truncates the sequence here.
            for k in 1..horizon {
                let kf = k as f64;
                let eta = (kf + 1.0).powf(-0.25);
                let theta = (kf / (kf + 1.0)).powf(0.25);
                let denom = 8.0 * d_x * (c.l_f + eta * c.l_h) + (kf * noise_term(c, eta)).sqrt();
                rows.push(ScheduleRow {
                    k,
                    tau: 1.0,
                    theta,
                    eta,
                    gamma: gamma_from_denominator(d_x, denom)?,
                });
            }
        }
        _ => {
            let eta = match eta_override {
                Some(e) => e,
                None => policy_eta(policy, c, horizon)?,
            };
            let denom = match policy {
                PolicyKind::SmoothStochasticMiniBatch => {
                    8.0 * d_x * (c.l_f + eta * c.l_h)
                        + (c.m_h * c.m_h + 2.0 * (c.sigma_h * c.sigma_h + c.sigma_f * c.sigma_f))
                            .sqrt()
                }
                PolicyKind::SmoothDeterministic
                | PolicyKind::SmoothDeterministicStronglyMonotone => {
                    8.0 * d_x * (c.l_f + eta * c.l_h)
                        + (c.m_h * c.m_h + 2.0 * c.sigma_h * c.sigma_h).sqrt()
                }
                _ => 8.0 * d_x * (c.l_f + eta * c.l_h) + (k_f * noise_term(c, eta)).sqrt(),
            };
            let gamma = gamma_from_denominator(d_x, denom)?;
            let growing_tau = policy.is_strongly_monotone();
            for k in 1..horizon {
                let kf = k as f64;
                let (tau, theta) = if growing_tau {
                    (kf + 1.0, kf / (kf + 1.0))
                } else {
                    (1.0, 1.0)
                };
                rows.push(ScheduleRow {
                    k,
                    tau,
                    theta,
                    eta,
                    gamma,
                });
            }
        }
    }

    Ok(Schedule {
        policy,
        horizon,
        batch_size,
        rows,
    })
}
