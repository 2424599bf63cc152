use crate::error::{CoreError, Result};
use crate::schedule::PolicyKind;

/// Problem moduli consumed by the step-size and bound formulas.
///
/// `l_*`/`m_*` split each operator into a Lipschitz part and a bounded
/// discontinuous part; `sigma_*` bound the oracle noise second moments.
/// Optional fields are only needed by specific policies, and anything that
/// reads an absent one fails fast rather than guessing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProblemConstants {
    pub l_f: f64,
    pub m_f: f64,
    pub l_h: f64,
    pub m_h: f64,
    pub sigma_f: f64,
    pub sigma_h: f64,
    /// Strong-monotonicity modulus of the outer operator (0 when merely monotone).
    pub mu_h: f64,
    pub c_f: Option<f64>,
    pub c_h: Option<f64>,
    pub b_f: Option<f64>,
    pub b_h: Option<f64>,
    /// Weak-sharpness modulus of the inner problem.
    pub alpha: Option<f64>,
    /// Norm of the outer operator at the bilevel solution.
    pub h_at_xstar_norm: Option<f64>,
}

impl ProblemConstants {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("l_f", self.l_f),
            ("m_f", self.m_f),
            ("l_h", self.l_h),
            ("m_h", self.m_h),
            ("sigma_f", self.sigma_f),
            ("sigma_h", self.sigma_h),
            ("mu_h", self.mu_h),
        ];
        for (name, v) in named {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidArgument(format!(
                    "constant {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("c_f", self.c_f),
            ("c_h", self.c_h),
            ("b_f", self.b_f),
            ("b_h", self.b_h),
            ("h_at_xstar_norm", self.h_at_xstar_norm),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(CoreError::InvalidArgument(format!(
                        "constant {name} must be finite and nonnegative, got {v}"
                    )));
                }
            }
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0) || !a.is_finite() {
                return Err(CoreError::InvalidArgument(format!(
                    "alpha must be finite and positive, got {a}"
                )));
            }
        }
        Ok(())
    }

    pub fn require_alpha(&self, policy: PolicyKind) -> Result<f64> {
        self.alpha.ok_or(CoreError::MissingConstant {
            policy,
            what: "the weak-sharpness modulus alpha",
        })
    }

    pub fn require_h_at_xstar_norm(&self, policy: PolicyKind) -> Result<f64> {
        self.h_at_xstar_norm.ok_or(CoreError::MissingConstant {
            policy,
            what: "the outer operator norm at the bilevel solution",
        })
    }

    pub fn require_c_h(&self, policy: PolicyKind) -> Result<f64> {
        self.c_h.ok_or(CoreError::MissingConstant {
            policy,
            what: "the outer operator bound c_h",
        })
    }

    pub fn require_b_h(&self, policy: PolicyKind) -> Result<f64> {
        self.b_h.ok_or(CoreError::MissingConstant {
            policy,
            what: "the outer operator bound b_h on the inner solution set",
        })
    }

    pub fn require_strongly_monotone(&self, policy: PolicyKind) -> Result<f64> {
        if self.mu_h > 0.0 {
            Ok(self.mu_h)
        } else {
            Err(CoreError::IncompatiblePolicy {
                policy,
                reason: "mu_h must be positive for a strongly monotone policy".into(),
            })
        }
    }
}
