use crate::constants::ProblemConstants;
use crate::schedule::{PolicyKind, ScheduleRow};

/// Relative tolerance for the equality-type conditions.
pub const EQUALITY_TOL: f64 = 1e-12;

/// The individual step-size conditions the convergence analysis needs.
/// Ratio conditions compare iteration `k` against `k-1`; equality conditions
/// must hold to within [`EQUALITY_TOL`] relative error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionId {
    /// `tau_k / (gamma_k eta_k) <= tau_{k-1} / (gamma_{k-1} eta_{k-1})`
    TauGammaEtaRatio,
    /// `tau_k theta_k / eta_k = tau_{k-1} / eta_{k-1}`
    TauThetaEtaEquality,
    /// `theta_k (l_f^2 + eta_k^2 l_h^2) <= 1 / (50 gamma_k gamma_{k-1})`
    GammaLipschitz,
    /// `tau_k / gamma_k <= tau_{k-1} / gamma_{k-1}`
    TauGammaRatio,
    /// `tau_k theta_k = tau_{k-1}`
    TauThetaEquality,
    /// Strongly monotone variant of the eta-weighted ratio:
    /// `tau_k / (2 gamma_k eta_k) <= (tau_{k-1}/eta_{k-1}) (1/(2 gamma_{k-1}) + eta_{k-1} mu_h)`
    TauGammaEtaRatioStrong,
    /// Strongly monotone variant of the plain ratio:
    /// `tau_k / (2 gamma_k) <= tau_{k-1} (1/(2 gamma_{k-1}) + eta_{k-1} mu_h)`
    TauGammaRatioStrong,
}

impl ConditionId {
    pub fn name(self) -> &'static str {
        match self {
            ConditionId::TauGammaEtaRatio => "tau/(gamma*eta) nonincreasing",
            ConditionId::TauThetaEtaEquality => "tau*theta/eta telescope equality",
            ConditionId::GammaLipschitz => "gamma Lipschitz margin",
            ConditionId::TauGammaRatio => "tau/gamma nonincreasing",
            ConditionId::TauThetaEquality => "tau*theta telescope equality",
            ConditionId::TauGammaEtaRatioStrong => "tau/(gamma*eta) strong-monotone slack",
            ConditionId::TauGammaRatioStrong => "tau/gamma strong-monotone slack",
        }
    }

    fn is_equality(self) -> bool {
        matches!(
            self,
            ConditionId::TauThetaEtaEquality | ConditionId::TauThetaEquality
        )
    }

    /// Strongly monotone ratio conditions only take effect once the
    /// mu-weighted slack outweighs the growing averaging weights, so they are
    /// checked from a minimal admissible index onward.
    fn has_admissibility_horizon(self) -> bool {
        matches!(
            self,
            ConditionId::TauGammaEtaRatioStrong | ConditionId::TauGammaRatioStrong
        )
    }

    /// Which conditions constrain each policy family.
    pub fn applicable(policy: PolicyKind) -> Vec<ConditionId> {
        use ConditionId::*;
        if policy == PolicyKind::AdaptiveKFree {
            return vec![TauThetaEtaEquality, GammaLipschitz];
        }
        if policy.is_strongly_monotone() {
            return vec![
                TauGammaEtaRatioStrong,
                TauThetaEtaEquality,
                GammaLipschitz,
                TauGammaRatioStrong,
                TauThetaEquality,
            ];
        }
        vec![
            TauGammaEtaRatio,
            TauThetaEtaEquality,
            GammaLipschitz,
            TauGammaRatio,
            TauThetaEquality,
        ]
    }
}

/// Outcome of checking one condition across a schedule.
#[derive(Clone, Debug, PartialEq)]
pub enum ConditionStatus {
    /// Holds at every index `k >= 2`.
    Satisfied,
    /// Holds from this index onward (and the prefix below it is the known
    /// warm-up region of the strongly monotone analysis).
    SatisfiedFrom(usize),
    /// No row satisfies it yet; the schedule would need at least this many
    /// iterations. Estimated from the final row's parameters.
    BeyondHorizon { min_admissible: usize },
    /// A genuine violation: fails at `first` after having held before it,
    /// or fails anywhere for a condition with no admissibility horizon.
    Violated { first: usize },
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub id: ConditionId,
    pub status: ConditionStatus,
    /// Worst relative residual seen (equality conditions only).
    pub max_equality_residual: f64,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        !matches!(self.status, ConditionStatus::Violated { .. })
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub policy: PolicyKind,
    pub conditions: Vec<ConditionReport>,
    /// Smallest horizon for which every strongly monotone condition is
    /// active, when one applies.
    pub min_admissible_horizon: Option<usize>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn condition(&self, id: ConditionId) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn first_violation(&self) -> Option<(ConditionId, usize)> {
        self.conditions.iter().find_map(|c| match c.status {
            ConditionStatus::Violated { first } => Some((c.id, first)),
            _ => None,
        })
    }
}

fn lhs_rhs(
    id: ConditionId,
    prev: &ScheduleRow,
    cur: &ScheduleRow,
    c: &ProblemConstants,
) -> (f64, f64) {
    match id {
        ConditionId::TauGammaEtaRatio => (
            cur.tau / (cur.gamma * cur.eta),
            prev.tau / (prev.gamma * prev.eta),
        ),
        ConditionId::TauThetaEtaEquality => (cur.tau * cur.theta / cur.eta, prev.tau / prev.eta),
        ConditionId::GammaLipschitz => (
            cur.theta * (c.l_f * c.l_f + cur.eta * cur.eta * c.l_h * c.l_h),
            1.0 / (50.0 * cur.gamma * prev.gamma),
        ),
        ConditionId::TauGammaRatio => (cur.tau / cur.gamma, prev.tau / prev.gamma),
        ConditionId::TauThetaEquality => (cur.tau * cur.theta, prev.tau),
        ConditionId::TauGammaEtaRatioStrong => (
            cur.tau / (2.0 * cur.gamma * cur.eta),
            (prev.tau / prev.eta) * (1.0 / (2.0 * prev.gamma) + prev.eta * c.mu_h),
        ),
        ConditionId::TauGammaRatioStrong => (
            cur.tau / (2.0 * cur.gamma),
            prev.tau * (1.0 / (2.0 * prev.gamma) + prev.eta * c.mu_h),
        ),
    }
}

fn check_condition(id: ConditionId, rows: &[ScheduleRow], c: &ProblemConstants) -> ConditionReport {
    let mut max_residual = 0.0f64;
    let mut first_ok: Option<usize> = None;
    let mut first_fail_after_ok: Option<usize> = None;
    let mut first_fail: Option<usize> = None;

    for w in rows.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let (lhs, rhs) = lhs_rhs(id, prev, cur, c);
        let ok = if id.is_equality() {
            let residual = (lhs - rhs).abs() / rhs.abs().max(1.0);
            max_residual = max_residual.max(residual);
            residual <= EQUALITY_TOL
        } else {
            lhs <= rhs
        };
        if ok {
            if first_ok.is_none() {
                first_ok = Some(cur.k);
            }
        } else {
            if first_fail.is_none() {
                first_fail = Some(cur.k);
            }
            if first_ok.is_some() && first_fail_after_ok.is_none() {
                first_fail_after_ok = Some(cur.k);
            }
        }
    }

    let status = if id.has_admissibility_horizon() {
        match (first_ok, first_fail_after_ok) {
            (_, Some(first)) => ConditionStatus::Violated { first },
            (Some(k), None) if first_fail.is_none_or(|f| f < k) => {
                if first_fail.is_none() {
                    ConditionStatus::Satisfied
                } else {
                    ConditionStatus::SatisfiedFrom(k)
                }
            }
            (Some(k), None) => ConditionStatus::SatisfiedFrom(k),
            (None, _) => ConditionStatus::BeyondHorizon {
                min_admissible: estimate_admissible_index(id, rows, c),
            },
        }
    } else {
        match first_fail {
            Some(first) => ConditionStatus::Violated { first },
            None => ConditionStatus::Satisfied,
        }
    };

    ConditionReport {
        id,
        status,
        max_equality_residual: max_residual,
    }
}

/// For constant `gamma`/`eta` rows, the strong-monotone ratio conditions
/// reduce to `k >= 1/(2 gamma eta mu_h)`; use the last row to extrapolate how
/// long the schedule would need to be.
fn estimate_admissible_index(id: ConditionId, rows: &[ScheduleRow], c: &ProblemConstants) -> usize {
    let last = rows.last().expect("nonempty rows");
    if c.mu_h <= 0.0 {
        return usize::MAX;
    }
    let threshold = match id {
        ConditionId::TauGammaEtaRatioStrong | ConditionId::TauGammaRatioStrong => {
            1.0 / (2.0 * last.gamma * last.eta * c.mu_h)
        }
        _ => return usize::MAX,
    };
    threshold.ceil().max(2.0) as usize
}

/// Checks every condition applicable to the policy across consecutive rows.
/// The report never panics on violations; it carries them.
pub fn validate_conditions(
    policy: PolicyKind,
    rows: &[ScheduleRow],
    constants: &ProblemConstants,
) -> ValidationReport {
    assert!(!rows.is_empty(), "schedule rows must be nonempty");
    let conditions: Vec<ConditionReport> = ConditionId::applicable(policy)
        .into_iter()
        .map(|id| check_condition(id, rows, constants))
        .collect();

    let min_admissible_horizon = conditions
        .iter()
        .filter_map(|cr| match cr.status {
            ConditionStatus::SatisfiedFrom(k) => Some(k + 1),
            ConditionStatus::BeyondHorizon { min_admissible } => Some(min_admissible + 1),
            _ => None,
        })
        .max();

    let passed = conditions.iter().all(|c| c.passed());
    ValidationReport {
        policy,
        conditions,
        min_admissible_horizon,
        passed,
    }
}
