//! Wardrop user-equilibrium traffic assignment as a complementarity-style
//! inner problem, with total network travel cost as the outer objective.
//!
//! Link travel times follow the generalized capacity-penalty form
//! `c(f) = t0 (1 + 0.15 (f / cap)^n)`. With unit exponents the inner
//! operator is affine and monotone, so the instance is a linear
//! complementarity problem over the nonnegative orthant; schedules need a
//! bounded set, so the instance is solved on a generously capped box.

use std::path::Path;
use std::sync::Arc;

use crate::constants::ProblemConstants;
use crate::error::{CoreError, Result};
use crate::oracle::{NoiseModel, StochasticOracle};
use crate::point::Point;
use crate::problems::{ProblemInstance, ProblemKind, References};
use crate::set::FeasibleSet;

pub const DEFAULT_CAP_BOX: f64 = 1e4;
pub const DEFAULT_MU_REG: f64 = 0.1;

/// A path-based network: paths list 1-based link ids, origin-destination
/// rows list 1-based path ids.
#[derive(Clone, Debug, PartialEq)]
pub struct TrafficNetwork {
    pub paths: Vec<Vec<usize>>,
    pub od_paths: Vec<Vec<usize>>,
    pub cap: Vec<f64>,
    pub t0: Vec<f64>,
    pub n_exp: Vec<f64>,
    pub demand_mean: Vec<f64>,
}

impl TrafficNetwork {
    pub fn link_count(&self) -> usize {
        self.cap.len()
    }

    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn od_count(&self) -> usize {
        self.od_paths.len()
    }

    /// Decision dimension: path flows plus one minimum-cost value per
    /// origin-destination pair.
    pub fn dim(&self) -> usize {
        self.path_count() + self.od_count()
    }

    /// The five-node, seven-link, two-commodity network with six paths.
    pub fn five_node() -> Self {
        TrafficNetwork {
            paths: vec![
                vec![3, 7, 6],
                vec![3, 1],
                vec![4, 6],
                vec![3, 7, 2],
                vec![3, 5],
                vec![4, 2],
            ],
            od_paths: vec![vec![1, 2, 3], vec![4, 5, 6]],
            cap: vec![400.0; 7],
            t0: vec![1.0; 7],
            n_exp: vec![1.0; 7],
            demand_mean: vec![200.0, 220.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let links = self.link_count();
        if links == 0 || self.path_count() == 0 || self.od_count() == 0 {
            return Err(CoreError::InvalidArgument(
                "network needs at least one link, path, and origin-destination pair".into(),
            ));
        }
        if self.t0.len() != links || self.n_exp.len() != links {
            return Err(CoreError::InvalidArgument(
                "cap, t0 and n must list every link".into(),
            ));
        }
        if self.demand_mean.len() != self.od_count() {
            return Err(CoreError::InvalidArgument(
                "one demand per origin-destination pair".into(),
            ));
        }
        if self.cap.iter().any(|c| *c <= 0.0) || self.t0.iter().any(|t| *t <= 0.0) {
            return Err(CoreError::InvalidArgument(
                "capacities and free-flow times must be positive".into(),
            ));
        }
        if self.n_exp.iter().any(|n| *n < 1.0) {
            return Err(CoreError::InvalidArgument(
                "congestion exponents must be at least 1".into(),
            ));
        }
        for (pi, path) in self.paths.iter().enumerate() {
            if path.is_empty() {
                return Err(CoreError::InvalidArgument(format!(
                    "path {} is empty",
                    pi + 1
                )));
            }
            if path.iter().any(|l| *l == 0 || *l > links) {
                return Err(CoreError::InvalidArgument(format!(
                    "path {} references a link outside 1..={links}",
                    pi + 1
                )));
            }
        }
        let mut owner = vec![0usize; self.path_count()];
        for (oi, row) in self.od_paths.iter().enumerate() {
            for p in row {
                if *p == 0 || *p > self.path_count() {
                    return Err(CoreError::InvalidArgument(format!(
                        "origin-destination row {} references path {p} outside 1..={}",
                        oi + 1,
                        self.path_count()
                    )));
                }
                owner[*p - 1] += 1;
            }
        }
        if owner.iter().any(|c| *c != 1) {
            return Err(CoreError::InvalidArgument(
                "every path must belong to exactly one origin-destination pair".into(),
            ));
        }
        Ok(())
    }

    /// Link-path incidence, `links x paths`.
    pub fn incidence(&self) -> Vec<Vec<f64>> {
        let mut delta = vec![vec![0.0; self.path_count()]; self.link_count()];
        for (p, path) in self.paths.iter().enumerate() {
            for l in path {
                delta[*l - 1][p] = 1.0;
            }
        }
        delta
    }

    /// Origin-destination / path incidence, `od x paths`.
    pub fn od_incidence(&self) -> Vec<Vec<f64>> {
        let mut omega = vec![vec![0.0; self.path_count()]; self.od_count()];
        for (o, row) in self.od_paths.iter().enumerate() {
            for p in row {
                omega[o][*p - 1] = 1.0;
            }
        }
        omega
    }

    /// Link flows `f = Delta h`.
    pub fn link_flows(&self, h: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.link_count()];
        for (p, path) in self.paths.iter().enumerate() {
            for l in path {
                f[*l - 1] += h[p];
            }
        }
        f
    }

    /// Link travel times `c_l(f_l) = t0_l (1 + 0.15 (f_l / cap_l)^{n_l})`.
    pub fn gbpr_cost(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.link_count() {
            return Err(CoreError::DimensionMismatch {
                expected: self.link_count(),
                got: f.len(),
            });
        }
        if f.iter().any(|v| *v < 0.0) {
            return Err(CoreError::InvalidArgument(
                "link flows must be nonnegative".into(),
            ));
        }
        Ok(f.iter()
            .enumerate()
            .map(|(l, fl)| self.t0[l] * (1.0 + 0.15 * (fl / self.cap[l]).powf(self.n_exp[l])))
            .collect())
    }

    /// Marginal link times `c'_l(f_l)`.
    pub fn gbpr_slope(&self, f: &[f64]) -> Vec<f64> {
        f.iter()
            .enumerate()
            .map(|(l, fl)| {
                let n = self.n_exp[l];
                self.t0[l] * 0.15 * n * fl.powf(n - 1.0) / self.cap[l].powf(n)
            })
            .collect()
    }

    /// Path travel times `C(h) = Delta^T c(Delta h)`.
    pub fn path_cost(&self, h: &[f64]) -> Result<Vec<f64>> {
        if h.len() != self.path_count() {
            return Err(CoreError::DimensionMismatch {
                expected: self.path_count(),
                got: h.len(),
            });
        }
        if h.iter().any(|v| *v < 0.0) {
            return Err(CoreError::InvalidArgument(
                "path flows must be nonnegative".into(),
            ));
        }
        let c = self.gbpr_cost(&self.link_flows(h))?;
        Ok(self
            .paths
            .iter()
            .map(|path| path.iter().map(|l| c[*l - 1]).sum())
            .collect())
    }

    /// `Delta^T diag(c'(Delta h)) Delta`, the slope of the path-cost map.
    /// Constant when every exponent is 1.
    pub fn path_cost_slope(&self, h: &[f64]) -> Vec<Vec<f64>> {
        let slope = self.gbpr_slope(&self.link_flows(h));
        let paths = self.path_count();
        let mut m = vec![vec![0.0; paths]; paths];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for l in &self.paths[i] {
                    if self.paths[j].contains(l) {
                        acc += slope[*l - 1];
                    }
                }
                *entry = acc;
            }
        }
        m
    }

    /// Expected total travel cost `1^T C(h)` (the cost weights are
    /// mean-one), evaluated at the path-flow block of `x`.
    pub fn total_cost(&self, x: &Point) -> Result<f64> {
        let h: Vec<f64> = x.as_slice()[..self.path_count()]
            .iter()
            .map(|v| v.max(0.0))
            .collect();
        Ok(self.path_cost(&h)?.iter().sum())
    }

    pub fn is_linear(&self) -> bool {
        self.n_exp.iter().all(|n| *n == 1.0)
    }

    /// Canonical plain-text form: one `path` line per path, one `od` line
    /// per origin-destination pair, then `cap`, `t0`, `n`, `demand`.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        for path in &self.paths {
            out.push_str("path ");
            out.push_str(
                &path
                    .iter()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push('\n');
        }
        for row in &self.od_paths {
            out.push_str("od ");
            out.push_str(
                &row.iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push('\n');
        }
        out.push_str(&format!("cap {}\n", join(&self.cap)));
        out.push_str(&format!("t0 {}\n", join(&self.t0)));
        out.push_str(&format!("n {}\n", join(&self.n_exp)));
        out.push_str(&format!("demand {}\n", join(&self.demand_mean)));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut network = TrafficNetwork {
            paths: Vec::new(),
            od_paths: Vec::new(),
            cap: Vec::new(),
            t0: Vec::new(),
            n_exp: Vec::new(),
            demand_mean: Vec::new(),
        };
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            let bad =
                |what: &str| CoreError::InvalidArgument(format!("network line {}: {what}", ln + 1));
            let ints = || -> Result<Vec<usize>> {
                rest.iter()
                    .map(|t| t.parse::<usize>().map_err(|_| bad("expected integers")))
                    .collect()
            };
            let floats = || -> Result<Vec<f64>> {
                rest.iter()
                    .map(|t| t.parse::<f64>().map_err(|_| bad("expected numbers")))
                    .collect()
            };
            match key {
                "path" => network.paths.push(ints()?),
                "od" => network.od_paths.push(ints()?),
                "cap" => network.cap = floats()?,
                "t0" => network.t0 = floats()?,
                "n" => network.n_exp = floats()?,
                "demand" => network.demand_mean = floats()?,
                other => return Err(bad(&format!("unknown keyword '{other}'"))),
            }
        }
        network.validate()?;
        Ok(network)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CoreError::InvalidArgument(format!("cannot read network file {path:?}: {e}"))
        })?;
        Self::parse(&text)
    }
}

/// One draw of the outer operator: the gradient in the path-flow block of
/// the weighted total travel cost `zeta^T C(h)`; the cost block is zero.
pub fn traffic_outer_mean(network: &TrafficNetwork, x: &Point, zeta: &[f64]) -> Result<Point> {
    if zeta.len() != network.path_count() {
        return Err(CoreError::DimensionMismatch {
            expected: network.path_count(),
            got: zeta.len(),
        });
    }
    x.check_dim(network.dim())?;
    let h: Vec<f64> = x.as_slice()[..network.path_count()]
        .iter()
        .map(|v| v.max(0.0))
        .collect();
    let m = network.path_cost_slope(&h);
    let mut out = Point::zeros(network.dim());
    for i in 0..network.path_count() {
        out[i] = m[i].iter().zip(zeta).map(|(a, z)| a * z).sum();
    }
    Ok(out)
}

fn frobenius(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .flat_map(|row| row.iter().map(|v| v * v))
        .sum::<f64>()
        .sqrt()
}

/// Spectral norm by power iteration on `J^T J`.
fn spectral_norm(j: &[Vec<f64>]) -> f64 {
    let n = j.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let apply = |m: &[Vec<f64>], x: &[f64], transpose: bool| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (r, row) in m.iter().enumerate() {
            for (c, val) in row.iter().enumerate() {
                if transpose {
                    out[c] += val * x[r];
                } else {
                    out[r] += val * x[c];
                }
            }
        }
        out
    };
    let mut sigma = 0.0;
    for _ in 0..200 {
        let w = apply(j, &apply(j, &v, false), true);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.iter().map(|x| x / norm).collect();
        sigma = norm.sqrt();
    }
    sigma
}

/// The built-in instance on the five-node network.
pub fn traffic_problem(
    strongly_monotone: bool,
    mu_reg: Option<f64>,
    cap_box: f64,
) -> Result<ProblemInstance> {
    traffic_problem_from_network(
        TrafficNetwork::five_node(),
        strongly_monotone,
        mu_reg,
        cap_box,
    )
}

pub fn traffic_problem_from_network(
    network: TrafficNetwork,
    strongly_monotone: bool,
    mu_reg: Option<f64>,
    cap_box: f64,
) -> Result<ProblemInstance> {
    network.validate()?;
    if !(cap_box > 0.0) {
        return Err(CoreError::InvalidArgument(
            "cap_box must be positive".into(),
        ));
    }
    if !network.is_linear() {
        return Err(CoreError::Unsupported(
            "operator constants are only derived for unit congestion exponents".into(),
        ));
    }
    let mu = if strongly_monotone {
        mu_reg.unwrap_or(DEFAULT_MU_REG)
    } else {
        0.0
    };
    if strongly_monotone && !(mu > 0.0) {
        return Err(CoreError::InvalidArgument(
            "mu_reg must be positive for the strongly monotone variant".into(),
        ));
    }

    let dim = network.dim();
    let paths = network.path_count();
    let ods = network.od_count();
    let omega = network.od_incidence();
    let set = FeasibleSet::capped_nonnegative(Point::filled(dim, cap_box))?;

    // inner operator: path-cost slack over path flows, demand slack over the
    // minimum-cost block; the demand draw perturbs the latter
    let net_f = network.clone();
    let omega_f = omega.clone();
    let inner_mean = move |x: &Point| -> Point {
        let h: Vec<f64> = x.as_slice()[..paths].iter().map(|v| v.max(0.0)).collect();
        let cost = net_f.path_cost(&h).expect("feasible flows");
        let mut out = Point::zeros(paths + ods);
        for p in 0..paths {
            let price: f64 = (0..ods).map(|o| omega_f[o][p] * x[paths + o]).sum();
            out[p] = cost[p] - price;
        }
        for o in 0..ods {
            let served: f64 = (0..paths).map(|p| omega_f[o][p] * h[p]).sum();
            out[paths + o] = served - net_f.demand_mean[o];
        }
        out
    };
    let mut demand_std = vec![0.0; dim];
    for o in 0..ods {
        demand_std[paths + o] = 1.0;
    }
    let inner = StochasticOracle::with_gaussian_noise(dim, inner_mean, demand_std);

    // outer operator: gradient of the expected weighted total travel cost
    // (weights are uniform on [0, 2], mean one), plus the optional
    // regularization that makes the instance strongly monotone
    let net_h = network.clone();
    let outer_mean = move |x: &Point| -> Point {
        let zeta = vec![1.0; paths];
        let mut g = traffic_outer_mean(&net_h, x, &zeta).expect("dimensions fixed");
        if mu > 0.0 {
            g.axpy(mu, x);
        }
        g
    };
    let net_noise = network.clone();
    let outer_noise = move |x: &Point, ctx: &mut crate::oracle::DrawCtx| -> Vec<f64> {
        let mut centered = vec![0.0; paths];
        for c in centered.iter_mut() {
            *c = ctx.next_uniform_in(0.0, 2.0) - 1.0;
        }
        let g = traffic_outer_mean(&net_noise, x, &centered).expect("dimensions fixed");
        g.into_vec()
    };
    // E||M (zeta - 1)||^2 = ||M||_F^2 / 3 for unit exponents
    let slope_matrix = network.path_cost_slope(&vec![0.0; paths]);
    let sigma_h_sq = frobenius(&slope_matrix).powi(2) / 3.0;
    let outer = StochasticOracle::new(
        dim,
        Arc::new(outer_mean),
        NoiseModel::Custom(Arc::new(outer_noise)),
        sigma_h_sq,
    );

    // operator moduli: the inner map is affine, so its Jacobian is exact
    let mut jac = vec![vec![0.0; dim]; dim];
    for i in 0..paths {
        for j in 0..paths {
            jac[i][j] = slope_matrix[i][j];
        }
        for o in 0..ods {
            jac[i][paths + o] = -omega[o][i];
            jac[paths + o][i] = omega[o][i];
        }
    }
    let l_f = spectral_norm(&jac);

    // affine maps peak at box vertices; enumerate them for the norm bounds
    let vertex_max = |eval: &dyn Fn(&Point) -> f64| -> f64 {
        let mut best = 0.0f64;
        for mask in 0..(1usize << dim) {
            let v = Point::new(
                (0..dim)
                    .map(|i| if mask & (1 << i) != 0 { cap_box } else { 0.0 })
                    .collect(),
            );
            best = best.max(eval(&v));
        }
        best
    };
    let inner_for_cf = inner.clone();
    let c_f = vertex_max(&|v| inner_for_cf.mean(v).norm());
    let outer_for_ch = outer.clone();
    let c_h = vertex_max(&|v| outer_for_ch.mean(v).norm());

    let constants = ProblemConstants {
        l_f,
        m_f: 0.0,
        l_h: mu, // the travel-cost gradient is constant for unit exponents
        m_h: 0.0,
        sigma_f: (ods as f64).sqrt(),
        sigma_h: sigma_h_sq.sqrt(),
        mu_h: mu,
        c_f: Some(c_f),
        c_h: Some(c_h),
        b_f: None,
        b_h: None,
        alpha: None,
        h_at_xstar_norm: None,
    };

    Ok(ProblemInstance {
        name: if strongly_monotone {
            "traffic-strong".into()
        } else {
            "traffic".into()
        },
        set,
        inner,
        outer,
        constants,
        references: References::default(),
        kind: ProblemKind::Traffic(network),
        default_start: Point::ones(dim),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidence_matches_the_path_lists() {
        let net = TrafficNetwork::five_node();
        let delta = net.incidence();
        // first path crosses links 3, 7, 6
        for (l, row) in delta.iter().enumerate() {
            let expected = if [3, 7, 6].contains(&(l + 1)) {
                1.0
            } else {
                0.0
            };
            assert_eq!(row[0], expected, "link {}", l + 1);
        }
        let omega = net.od_incidence();
        assert_eq!(omega[0], vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(omega[1], vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn free_flow_times() {
        let net = TrafficNetwork::five_node();
        let c = net.gbpr_cost(&[0.0; 7]).unwrap();
        assert!(c.iter().all(|v| *v == 1.0));
        let c = net
            .gbpr_cost(&[400.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        assert!((c[0] - 1.15).abs() < 1e-15);
        let c = net
            .gbpr_cost(&[800.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        assert!((c[0] - 1.30).abs() < 1e-15);
        assert!(net
            .gbpr_cost(&[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .is_err());
    }

    #[test]
    fn empty_network_costs_are_path_lengths() {
        let net = TrafficNetwork::five_node();
        let c = net.path_cost(&[0.0; 6]).unwrap();
        assert_eq!(c, vec![3.0, 2.0, 2.0, 3.0, 2.0, 2.0]);
    }

    #[test]
    fn single_loaded_path_congests_its_links() {
        let net = TrafficNetwork::five_node();
        // only the second path (links 3 and 1) carries 400 vehicles
        let mut h = [0.0; 6];
        h[1] = 400.0;
        let c = net.path_cost(&h).unwrap();
        assert!((c[1] - 2.30).abs() < 1e-12);
    }

    #[test]
    fn linear_cost_expansion_holds_for_unit_exponents() {
        let net = TrafficNetwork::five_node();
        let m = net.path_cost_slope(&[0.0; 6]);
        let lengths = [3.0, 2.0, 2.0, 3.0, 2.0, 2.0];
        let mut lcg = 7u64;
        let mut unit = || {
            lcg = lcg
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (lcg >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let h: Vec<f64> = (0..6).map(|_| 500.0 * unit()).collect();
            let direct = net.path_cost(&h).unwrap();
            for i in 0..6 {
                let linear: f64 = lengths[i] + (0..6).map(|j| m[i][j] * h[j]).sum::<f64>();
                assert!((direct[i] - linear).abs() < 1e-9);
            }
        }
        // slope entries are 0.15/400 per shared link
        assert!((m[0][0] - 3.0 * 0.000375).abs() < 1e-15);
        assert!((m[0][3] - 2.0 * 0.000375).abs() < 1e-15);
    }

    #[test]
    fn outer_gradient_hand_values() {
        let net = TrafficNetwork::five_node();
        let x = Point::zeros(8);
        let g = traffic_outer_mean(&net, &x, &[1.0; 6]).unwrap();
        // row sum of the shared-link counts for the first path is 8
        assert!((g[0] - 0.000375 * 8.0).abs() < 1e-12);
        assert_eq!(g[6], 0.0);
        assert_eq!(g[7], 0.0);
        let zero = traffic_outer_mean(&net, &x, &[0.0; 6]).unwrap();
        assert!(zero.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn inner_mean_at_the_origin() {
        let p = traffic_problem(false, None, DEFAULT_CAP_BOX).unwrap();
        let f0 = p.inner.mean(&Point::zeros(8));
        assert_eq!(
            f0.as_slice(),
            &[3.0, 2.0, 2.0, 3.0, 2.0, 2.0, -200.0, -220.0]
        );
    }

    #[test]
    fn inner_jacobian_has_positive_semidefinite_symmetric_part() {
        let p = traffic_problem(false, None, DEFAULT_CAP_BOX).unwrap();
        let mut lcg = 31u64;
        let mut unit = || {
            lcg = lcg
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (lcg >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let a = Point::new((0..8).map(|_| 1000.0 * unit()).collect());
            let b = Point::new((0..8).map(|_| 1000.0 * unit()).collect());
            let ip = p.inner.mean(&a).sub(&p.inner.mean(&b)).dot(&a.sub(&b));
            assert!(ip >= -1e-10 * (1.0 + a.sub(&b).norm_sq()), "{ip}");
        }
    }

    #[test]
    fn strongly_monotone_variant_regularizes_the_outer_map() {
        let p = traffic_problem(true, Some(0.1), DEFAULT_CAP_BOX).unwrap();
        assert_eq!(p.constants.mu_h, 0.1);
        let x = Point::ones(8);
        let plain = traffic_problem(false, None, DEFAULT_CAP_BOX).unwrap();
        let diff = p.outer.mean(&x).sub(&plain.outer.mean(&x));
        for v in diff.as_slice() {
            assert!((v - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn round_trips_through_the_text_format() {
        let net = TrafficNetwork::five_node();
        let text = net.to_text();
        let parsed = TrafficNetwork::parse(&text).unwrap();
        assert_eq!(parsed, net);
    }

    #[test]
    fn bundled_network_file_matches_the_constructor() {
        let bundled = include_str!("../../data/five_node.net");
        let parsed = TrafficNetwork::parse(bundled).unwrap();
        assert_eq!(parsed, TrafficNetwork::five_node());
    }

    #[test]
    fn parser_rejects_malformed_networks() {
        assert!(TrafficNetwork::parse("path 1 2\nod 1\ncap 1\nt0 1\nn 1\ndemand 5").is_err()); // link 2 missing
        assert!(TrafficNetwork::parse("junk 1").is_err());
        // a path claimed by two rows
        let doubled = "path 1\nod 1\nod 1\ncap 1\nt0 1\nn 1\ndemand 5 5";
        assert!(TrafficNetwork::parse(doubled).is_err());
    }

    #[test]
    fn nonpositive_cap_is_rejected() {
        assert!(traffic_problem(false, None, 0.0).is_err());
        assert!(traffic_problem(false, None, -5.0).is_err());
        assert!(traffic_problem(true, Some(0.0), DEFAULT_CAP_BOX).is_err());
    }

    #[test]
    fn lipschitz_constant_covers_sampled_pairs() {
        let p = traffic_problem(false, None, DEFAULT_CAP_BOX).unwrap();
        let l_f = p.constants.l_f;
        assert!(l_f > 1.0 && l_f < 3.0, "{l_f}");
        let mut lcg = 5u64;
        let mut unit = || {
            lcg = lcg
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (lcg >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let a = Point::new((0..8).map(|_| 2000.0 * unit()).collect());
            let b = Point::new((0..8).map(|_| 2000.0 * unit()).collect());
            let lhs = p.inner.mean(&a).distance_to(&p.inner.mean(&b));
            assert!(lhs <= l_f * a.distance_to(&b) + 1e-9);
        }
    }
}
