//! Closed-form convergence certificates for each step-size policy, evaluated
//! verbatim from the analysis. They serve as diagnostics to compare empirical
//! gaps against; no simplification is applied, so structurally similar terms
//! are kept separate exactly as each policy's certificate states them.

use crate::constants::ProblemConstants;
use crate::error::{CoreError, Result};
use crate::schedule::{noise_term, policy_eta, PolicyKind};

/// Evaluated bound values for one `(policy, horizon)` pair. Fields are absent
/// when the analysis does not state that bound for the policy: weak-sharp
/// policies certify a distance to the inner solution set instead of a
/// feasibility gap, and only the policies with a weak-sharpness assumption
/// admit an optimality lower bound.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub policy: PolicyKind,
    pub horizon: usize,
    pub optimality_upper: f64,
    pub feasibility_upper: Option<f64>,
    pub dist_upper: Option<f64>,
    pub optimality_lower: Option<f64>,
}

impl BoundReport {
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![("optimality_upper", self.optimality_upper)];
        if let Some(v) = self.feasibility_upper {
            out.push(("feasibility_upper", v));
        }
        if let Some(v) = self.dist_upper {
            out.push(("dist_upper", v));
        }
        if let Some(v) = self.optimality_lower {
            out.push(("optimality_lower", v));
        }
        out
    }
}

/// `num / den`, except that a vanishing numerator kills the whole term even
/// when the denominator also vanishes (every such term is a noise term whose
/// denominator is zero only if the same moduli are zero).
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

struct Terms<'a> {
    c: &'a ProblemConstants,
    d: f64,
    k: f64,
    eta: f64,
}

impl Terms<'_> {
    /// `m_f^2 + 2 sigma_f^2 + eta^2 (m_h^2 + 2 sigma_h^2)`
    fn v(&self) -> f64 {
        noise_term(self.c, self.eta)
    }

    /// Variant with a single `sigma_h^2`, appearing in some tail terms.
    fn v_single(&self) -> f64 {
        let c = self.c;
        c.m_f * c.m_f
            + 2.0 * c.sigma_f * c.sigma_f
            + self.eta * self.eta * (c.m_h * c.m_h + c.sigma_h * c.sigma_h)
    }

    fn lip(&self) -> f64 {
        self.c.l_f + self.eta * self.c.l_h
    }

    fn noise_cross(&self) -> f64 {
        self.c.sigma_f * self.c.sigma_f + self.eta * self.eta * self.c.sigma_h * self.c.sigma_h
    }
}

fn monotone_fixed_optimality_upper(t: &Terms) -> f64 {
    let (d, k) = (t.d, t.k);
    let v = t.v();
    t.d * (16.0 * d * (t.c.l_f / k.powf(0.75) + t.c.l_h / k)
        + 2.0 * v.sqrt() / k.powf(0.25)
        + ratio(
            5.0 * v + t.noise_cross(),
            8.0 * d * k.powf(-0.25) * t.lip() + k.powf(0.25) * v.sqrt(),
        )
        + ratio(
            5.0 * v,
            8.0 * d * k.powf(0.75) * t.lip() + k.powf(1.25) * t.v_single().sqrt(),
        ))
}

fn monotone_fixed_feasibility_upper(t: &Terms, c_h: f64) -> f64 {
    let (d, k) = (t.d, t.k);
    let v = t.v();
    t.d * (16.0 * d * (t.c.l_f / k + t.c.l_h / k.powf(1.25))
        + 2.0 * v.sqrt() / k.sqrt()
        + ratio(
            5.0 * v + t.noise_cross(),
            8.0 * d * t.lip() + k.sqrt() * v.sqrt(),
        )
        + ratio(
            5.0 * t.v_single(),
            8.0 * d * k * t.lip() + k.powf(1.5) * v.sqrt(),
        )
        + 2.0 * c_h / k.powf(0.25))
}

fn weak_sharp_optimality_upper(t: &Terms, h_norm: f64, alpha: f64) -> f64 {
    let (d, k) = (t.d, t.k);
    let v = t.v();
    (h_norm * d / alpha)
        * (16.0 * d * (t.c.l_f / k + t.c.l_h / k.powf(1.25))
            + 2.0 * v.sqrt() / k.sqrt()
            + ratio(
                2.0 * (5.0 * v + t.noise_cross()),
                8.0 * d * t.lip() + k.sqrt() * v.sqrt(),
            )
            + ratio(10.0 * v, 8.0 * k * d * t.lip() + k.powf(1.5) * v.sqrt()))
}

fn weak_sharp_dist_upper(t: &Terms, alpha: f64) -> f64 {
    let (d, k) = (t.d, t.k);
    let v = t.v();
    (d / alpha)
        * (32.0 * d * (t.c.l_f / k + t.c.l_h / k.powf(1.25))
            + 4.0 * v.sqrt() / k.sqrt()
            + ratio(
                10.0 * v + 2.0 * t.noise_cross(),
                8.0 * d * t.lip() + k.sqrt() * v.sqrt(),
            )
            + ratio(10.0 * v, 8.0 * k * d * t.lip() + k.powf(1.5) * v.sqrt()))
}

fn strongly_monotone_optimality_upper(t: &Terms) -> f64 {
    let (d, k) = (t.d, t.k);
    let v = t.v();
    t.d * ((16.0 * d * (t.c.l_f / k.powf(1.75) + t.c.l_h / (k * k))
        + 2.0 * v.sqrt() / k.powf(1.25))
        + ratio(
            5.0 * v + t.noise_cross(),
            8.0 * k.powf(0.75) * d * t.lip() + k.powf(1.25) * v.sqrt(),
        )
        + ratio(
            5.0 * v,
            8.0 * k.powf(1.75) * d * t.lip() + k.powf(2.25) * t.v_single().sqrt(),
        ))
}

fn strongly_monotone_feasibility_upper(t: &Terms, c_h: f64) -> f64 {
    let (d, k) = (t.d, t.k);
    let v = t.v();
    t.d * ((16.0 * d * (t.c.l_f / (k * k) + t.c.l_h / k.powf(2.25)) + 2.0 * v.sqrt() / k.powf(1.5))
        + ratio(
            5.0 * v + t.noise_cross(),
            8.0 * k * t.lip() + k.powf(1.5) * v.sqrt(),
        )
        + ratio(
            5.0 * t.v_single(),
            8.0 * k * k * t.lip() + k.powf(2.5) * v.sqrt(),
        )
        + 2.0 * c_h / k.powf(1.25))
}

fn strongly_monotone_lower_bracket(t: &Terms, c_h: f64) -> f64 {
    let (d, k) = (t.d, t.k);
    let v = t.v();
    d * ((16.0 * d * (t.c.l_f / (k * k) + t.c.l_h / k.powf(2.25)) + 2.0 * v.sqrt() / k.powf(1.5))
        + ratio(
            5.0 * v + t.noise_cross(),
            8.0 * k * d * t.lip() + k.powf(1.5) * v.sqrt(),
        )
        + ratio(
            5.0 * t.v_single(),
            8.0 * k * k * d * t.lip() + k.powf(2.5) * v.sqrt(),
        ))
        + 2.0 * c_h / k.powf(1.25)
}

fn strong_weak_sharp_optimality_upper(t: &Terms, h_norm: f64, alpha: f64) -> f64 {
    let (d, k) = (t.d, t.k);
    let v = t.v();
    (h_norm * d * d / alpha)
        * (32.0 * (t.c.l_f / (k * k) + t.c.l_h / k.powf(2.25))
            + 4.0 * v.sqrt() / k.powf(1.5)
            + ratio(
                2.0 * (5.0 * v + t.noise_cross()),
                8.0 * k * t.lip() + k.powf(1.5) * v.sqrt(),
            )
            + ratio(10.0 * v, 8.0 * k * k * t.lip() + k.powf(2.5) * v.sqrt()))
}

fn strong_weak_sharp_dist_upper(t: &Terms, alpha: f64) -> f64 {
    let (d, k) = (t.d, t.k);
    let v = t.v();
    (d / alpha)
        * (32.0 * d * (t.c.l_f / (k * k) + t.c.l_h / k.powf(2.25))
            + 4.0 * v.sqrt() / k.powf(1.5)
            + ratio(
                10.0 * v + 2.0 * t.noise_cross(),
                8.0 * k * d * t.lip() + k.powf(1.5) * v.sqrt(),
            )
            + ratio(10.0 * v, 8.0 * k * k * d * t.lip() + k.powf(2.5) * v.sqrt()))
}

fn adaptive_optimality_upper(t: &Terms, d_inner: f64) -> f64 {
    let (d, k, c) = (t.d, t.k, t.c);
    let eta_last = t.eta;
    let v = t.v();
    let mf2 = c.m_f * c.m_f + 2.0 * c.sigma_f * c.sigma_f;
    let mh2 = c.m_h * c.m_h + 2.0 * c.sigma_h * c.sigma_h;
    // the tail square root carries eta to the first power
    let v_tail = mf2 + eta_last * mh2;
    ((d * d + d_inner * d_inner) / d)
        * (16.0 * d * (c.l_f + eta_last * c.l_h) / k.powf(0.75) + 2.0 * v.sqrt() / k.powf(0.25))
        + ratio(
            5.0 * d * v,
            8.0 * k.powf(0.75) * d * (c.l_f + eta_last * c.l_h) + k.powf(1.25) * v_tail.sqrt(),
        )
        + ratio(
            d * (20.0 * mf2 + c.sigma_f * c.sigma_f),
            3.0 * k.powf(0.25) * mf2.sqrt(),
        )
        + ratio(
            d * (10.0 * mh2 + c.sigma_h * c.sigma_h),
            k.sqrt() * mh2.sqrt(),
        )
}

fn adaptive_feasibility_upper(t: &Terms, c_h: f64) -> f64 {
    let (d, k, c) = (t.d, t.k, t.c);
    let eta_last = t.eta;
    let eta_first = 2f64.powf(-0.25);
    let v = t.v();
    let mf2 = c.m_f * c.m_f + 2.0 * c.sigma_f * c.sigma_f;
    let mh2 = c.m_h * c.m_h + 2.0 * c.sigma_h * c.sigma_h;
    d * (32.0 * d * (c.l_f + eta_last * c.l_h) / k + 2.0 * v.sqrt() / k.sqrt())
        + 2.0
            * (d / k)
            * (2.0 * d * (2.0 * c.l_f + (eta_last + eta_first) * c.l_h)
                + 2.0 * c.m_f
                + 4.0 * c.sigma_f
                + (eta_last + eta_first) * (c.m_h + 2.0 * c.sigma_h))
        + 4.0
            * (d * (k + 2.0).powf(0.75) / k)
            * (2.0 * d * (c.l_f + eta_first * c.l_h)
                + c.m_f
                + 2.0 * c.sigma_f
                + eta_first * (c.m_h + 2.0 * c.sigma_h))
        + ratio(
            d * (20.0 * mf2 + c.sigma_f * c.sigma_f),
            3.0 * k.sqrt() * mf2.sqrt(),
        )
        + ratio(
            d * (10.0 * mh2 + c.sigma_h * c.sigma_h),
            k.powf(0.75) * mh2.sqrt(),
        )
        + 2.0 * c_h * d / k.powf(0.25)
}

/// Smooth-regime noise aggregate under the square roots.
fn smooth_noise(c: &ProblemConstants, with_sigma_f: bool) -> f64 {
    let extra = if with_sigma_f {
        c.sigma_f * c.sigma_f
    } else {
        0.0
    };
    c.m_h * c.m_h + 2.0 * (c.sigma_h * c.sigma_h + extra)
}

fn smooth_optimality_upper(t: &Terms, with_sigma_f: bool) -> f64 {
    let (d, k, c) = (t.d, t.k, t.c);
    let w = smooth_noise(c, with_sigma_f);
    let cross = c.sigma_h * c.sigma_h
        + if with_sigma_f {
            c.sigma_f * c.sigma_f
        } else {
            0.0
        };
    d * ((16.0 * d * (c.l_f / k.sqrt() + c.l_h / k) + 2.0 * w.sqrt() / k.sqrt())
        + ratio(
            5.0 * w + cross,
            8.0 * d * k.sqrt() * t.lip() + k.sqrt() * w.sqrt(),
        )
        + ratio(
            5.0 * w,
            8.0 * d * k.powf(1.5) * t.lip() + k.powf(1.5) * w.sqrt(),
        ))
}

fn smooth_feasibility_upper(t: &Terms, c_h: f64, with_sigma_f: bool) -> f64 {
    let (d, k, c) = (t.d, t.k, t.c);
    let w = smooth_noise(c, with_sigma_f);
    let cross = c.sigma_h * c.sigma_h
        + if with_sigma_f {
            c.sigma_f * c.sigma_f
        } else {
            0.0
        };
    d * ((16.0 * d * (c.l_f / k + c.l_h / k.powf(1.5)) + w.sqrt() / k)
        + ratio(5.0 * w + cross, 8.0 * d * k * t.lip() + k * w.sqrt())
        + ratio(5.0 * w, 8.0 * d * k * k * t.lip() + k * k * w.sqrt())
        + 2.0 * c_h / k.sqrt())
}

fn smooth_optimality_lower_bracket(t: &Terms, c_h: f64) -> f64 {
    let (d, k, c) = (t.d, t.k, t.c);
    let u = smooth_noise(c, false);
    let u_single = c.m_h * c.m_h + c.sigma_h * c.sigma_h;
    2.0 * d * d * (8.0 * (c.l_f / k.sqrt() + c.l_h / k) + u.sqrt() / k.sqrt())
        + ratio(
            5.0 * u + c.sigma_h * c.sigma_h,
            8.0 * k.sqrt() * t.lip() + k.sqrt() * u.sqrt(),
        )
        + ratio(
            5.0 * u,
            8.0 * k.powf(1.5) * t.lip() + k.powf(1.5) * u_single.sqrt(),
        )
        + 2.0 * c_h * d / k.sqrt()
}

fn smooth_strong_optimality_upper(t: &Terms) -> f64 {
    let (d, k, c) = (t.d, t.k, t.c);
    let u = smooth_noise(c, false);
    d * ((16.0 * d * (c.l_f / k.powf(1.5) + c.l_h / (k * k)) + 2.0 * u.sqrt() / k.powf(1.5))
        + ratio(
            5.0 * u + c.sigma_h * c.sigma_h,
            8.0 * d * k.powf(1.5) * t.lip() + k.powf(1.5) * u.sqrt(),
        )
        + ratio(
            5.0 * u,
            8.0 * d * k.powf(1.5) * t.lip() + k.powf(2.5) * u.sqrt(),
        ))
}

fn smooth_strong_feasibility_upper(t: &Terms, c_h: f64) -> f64 {
    let (d, k, c) = (t.d, t.k, t.c);
    let u = smooth_noise(c, false);
    d * ((16.0 * d * (c.l_f / (k * k) + c.l_h / k.powf(2.5)) + u.sqrt() / (k * k))
        + ratio(
            5.0 * u + c.sigma_h * c.sigma_h,
            8.0 * d * k * k * t.lip() + k * k * u.sqrt(),
        )
        + ratio(
            5.0 * u,
            8.0 * d * k * k * k * t.lip() + k * k * k * u.sqrt(),
        )
        + 2.0 * c_h / k.powf(1.5))
}

/// Evaluates the closed-form bounds of the given policy at horizon `K`.
///
/// `d_inner` is the half-diameter of the inner solution set, used only by
/// the adaptive bound; it defaults to `d_x` (the solution set is contained
/// in the feasible set, so this is always valid if loose).
/// The optimality lower bound is reported only when both `alpha` and `b_h`
/// are available.
pub fn theoretical_bounds(
    policy: PolicyKind,
    constants: &ProblemConstants,
    d_x: f64,
    c_h: f64,
    d_inner: Option<f64>,
    horizon: usize,
) -> Result<BoundReport> {
    constants.validate()?;
    if horizon < 1 {
        return Err(CoreError::InvalidArgument("horizon must be >= 1".into()));
    }
    if !(d_x > 0.0) {
        return Err(CoreError::InvalidArgument("d_x must be positive".into()));
    }
    let eta = match policy {
        PolicyKind::AdaptiveKFree => (horizon as f64).powf(-0.25),
        _ => policy_eta(policy, constants, horizon)?,
    };
    let t = Terms {
        c: constants,
        d: d_x,
        k: horizon as f64,
        eta,
    };
    let lower_scale = match (constants.b_h, constants.alpha) {
        (Some(b_h), Some(alpha)) => Some(b_h / alpha),
        _ => None,
    };

    let (optimality_upper, feasibility_upper, dist_upper, optimality_lower) = match policy {
        PolicyKind::MonotoneFixed => {
            let feas = monotone_fixed_feasibility_upper(&t, c_h);
            (
                monotone_fixed_optimality_upper(&t),
                Some(feas),
                None,
                lower_scale.map(|s| -s * feas),
            )
        }
        PolicyKind::WeakSharp => {
            let alpha = constants.require_alpha(policy)?;
            let h_norm = constants.require_h_at_xstar_norm(policy)?;
            (
                weak_sharp_optimality_upper(&t, h_norm, alpha),
                None,
                Some(weak_sharp_dist_upper(&t, alpha)),
                None,
            )
        }
        PolicyKind::StronglyMonotone => (
            strongly_monotone_optimality_upper(&t),
            Some(strongly_monotone_feasibility_upper(&t, c_h)),
            None,
            lower_scale.map(|s| -s * strongly_monotone_lower_bracket(&t, c_h)),
        ),
        PolicyKind::StronglyMonotoneWeakSharp => {
            let alpha = constants.require_alpha(policy)?;
            let h_norm = constants.require_h_at_xstar_norm(policy)?;
            (
                strong_weak_sharp_optimality_upper(&t, h_norm, alpha),
                None,
                Some(strong_weak_sharp_dist_upper(&t, alpha)),
                None,
            )
        }
        PolicyKind::AdaptiveKFree => {
            let feas = adaptive_feasibility_upper(&t, c_h);
            (
                adaptive_optimality_upper(&t, d_inner.unwrap_or(d_x)),
                Some(feas),
                None,
                lower_scale.map(|s| -s * feas),
            )
        }
        PolicyKind::SmoothStochasticMiniBatch => (
            smooth_optimality_upper(&t, true),
            Some(smooth_feasibility_upper(&t, c_h, true)),
            None,
            None,
        ),
        PolicyKind::SmoothDeterministic => (
            smooth_optimality_upper(&t, false),
            Some(smooth_feasibility_upper(&t, c_h, false)),
            None,
            lower_scale.map(|s| -s * smooth_optimality_lower_bracket(&t, c_h)),
        ),
        PolicyKind::SmoothDeterministicStronglyMonotone => (
            smooth_strong_optimality_upper(&t),
            Some(smooth_strong_feasibility_upper(&t, c_h)),
            None,
            None,
        ),
    };

    Ok(BoundReport {
        policy,
        horizon,
        optimality_upper,
        feasibility_upper,
        dist_upper,
        optimality_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lipschitz_only() -> ProblemConstants {
        ProblemConstants {
            l_f: 1.0,
            c_h: Some(1.0),
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_feasibility_bound_closed_form() {
        // d_x = 1, l_f = 1, everything else 0, c_h = 1, K = 16:
        // 16/16 + 2/16^(1/4) = 1 + 1 = 2.
        let r = theoretical_bounds(
            PolicyKind::MonotoneFixed,
            &lipschitz_only(),
            1.0,
            1.0,
            None,
            16,
        )
        .unwrap();
        assert!((r.feasibility_upper.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_optimality_bound_closed_form() {
        // 16 / 16^(3/4) = 2.
        let r = theoretical_bounds(
            PolicyKind::MonotoneFixed,
            &lipschitz_only(),
            1.0,
            1.0,
            None,
            16,
        )
        .unwrap();
        assert!((r.optimality_upper - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_decrease_in_the_horizon() {
        let c = lipschitz_only();
        for policy in [
            PolicyKind::MonotoneFixed,
            PolicyKind::StronglyMonotone,
            PolicyKind::SmoothDeterministic,
            PolicyKind::AdaptiveKFree,
        ] {
            let c = if policy.is_strongly_monotone() {
                ProblemConstants {
                    mu_h: 1.0,
                    ..c.clone()
                }
            } else {
                c.clone()
            };
            let small = theoretical_bounds(policy, &c, 1.0, 1.0, None, 64).unwrap();
            let large = theoretical_bounds(policy, &c, 1.0, 1.0, None, 640).unwrap();
            assert!(large.optimality_upper < small.optimality_upper, "{policy}");
            assert!(
                large.feasibility_upper.unwrap() < small.feasibility_upper.unwrap(),
                "{policy}"
            );
        }
    }

    #[test]
    fn deterministic_terms_scale_quadratically_in_the_radius() {
        // with c_h = 0 and all second-moment moduli zero, every surviving
        // term carries d_x^2
        let c = ProblemConstants {
            l_f: 1.0,
            l_h: 0.5,
            ..Default::default()
        };
        let one = theoretical_bounds(PolicyKind::MonotoneFixed, &c, 1.0, 0.0, None, 256).unwrap();
        let two = theoretical_bounds(PolicyKind::MonotoneFixed, &c, 2.0, 0.0, None, 256).unwrap();
        assert!((two.optimality_upper - 4.0 * one.optimality_upper).abs() < 1e-12);
        assert!(
            (two.feasibility_upper.unwrap() - 4.0 * one.feasibility_upper.unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn lower_bound_needs_sharpness_data() {
        let without = theoretical_bounds(
            PolicyKind::MonotoneFixed,
            &lipschitz_only(),
            1.0,
            1.0,
            None,
            16,
        )
        .unwrap();
        assert!(without.optimality_lower.is_none());

        let with = ProblemConstants {
            alpha: Some(2.0),
            b_h: Some(3.0),
            ..lipschitz_only()
        };
        let r = theoretical_bounds(PolicyKind::MonotoneFixed, &with, 1.0, 1.0, None, 16).unwrap();
        // -(b_h/alpha) times the feasibility value
        let expected = -(3.0 / 2.0) * r.feasibility_upper.unwrap();
        assert!((r.optimality_lower.unwrap() - expected).abs() < 1e-12);
        assert!(r.optimality_lower.unwrap() <= r.optimality_upper);
    }

    #[test]
    fn weak_sharp_reports_distance_instead_of_feasibility() {
        let c = ProblemConstants {
            l_f: 2.0,
            l_h: 1.0,
            sigma_f: 1.0,
            sigma_h: 2f64.sqrt(),
            alpha: Some(40.0),
            h_at_xstar_norm: Some(425f64.sqrt()),
            ..Default::default()
        };
        let r = theoretical_bounds(PolicyKind::WeakSharp, &c, 15.0, 52.0, None, 1024).unwrap();
        assert!(r.feasibility_upper.is_none());
        assert!(r.dist_upper.unwrap() > 0.0);
        assert!(r.optimality_upper > 0.0);
    }

    #[test]
    fn zero_noise_never_divides_by_zero() {
        // all moduli zero except c_h: every ratio term must vanish cleanly
        let c = ProblemConstants::default();
        for policy in [
            PolicyKind::MonotoneFixed,
            PolicyKind::AdaptiveKFree,
            PolicyKind::SmoothStochasticMiniBatch,
            PolicyKind::SmoothDeterministic,
        ] {
            let r = theoretical_bounds(policy, &c, 1.0, 1.0, None, 16).unwrap();
            assert!(r.optimality_upper.is_finite(), "{policy}");
            assert!(r.feasibility_upper.unwrap().is_finite(), "{policy}");
        }
    }
}
