//! Synthetic affine instances used for oracle-equivalence checks, reductions,
//! and deterministic rate studies.
//!
//! The inner operator is `F(x) = A (x - c) + s (x - c) + b 1` with `A` the
//! block-pairwise rotation generator (skew, so monotone) scaled by
//! `rotation`, a scaled-identity part `s >= 0`, and a constant drift `b`.
//! The outer operator is `H(x) = x - target`. Everything lives on the box
//! `[lower, upper]^n`.

use crate::constants::ProblemConstants;
use crate::error::{CoreError, Result};
use crate::oracle::StochasticOracle;
use crate::point::Point;
use crate::problems::{ProblemInstance, ProblemKind, References};
use crate::set::FeasibleSet;

#[derive(Clone, Debug)]
pub struct ToyConfig {
    pub n: usize,
    /// Skew strength: coordinate pairs `(2i, 2i+1)` rotate into each other.
    /// An odd trailing coordinate is untouched.
    pub rotation: f64,
    /// Scaled-identity strength of the inner operator.
    pub symmetric: f64,
    /// Constant added to every inner coordinate.
    pub drift: f64,
    /// Center of the rotation/identity parts, default the box's lower corner
    /// shifted to the origin (i.e. zeros).
    pub center: Option<Vec<f64>>,
    /// Outer target, default `0.3` on every coordinate.
    pub target: Option<Vec<f64>>,
    pub lower: f64,
    pub upper: f64,
    /// Per-coordinate Gaussian standard deviations of the two oracles.
    pub noise_f: f64,
    pub noise_h: f64,
}

impl ToyConfig {
    pub fn deterministic_defaults(n: usize) -> Self {
        ToyConfig {
            n,
            rotation: 0.0,
            symmetric: 0.0,
            drift: 0.0,
            center: None,
            target: None,
            lower: 0.0,
            upper: 1.0,
            noise_f: 0.0,
            noise_h: 0.0,
        }
    }

    /// `F(x) = x` on `[0, 1]`.
    pub fn monotone_1d() -> Self {
        ToyConfig {
            symmetric: 1.0,
            ..ToyConfig::deterministic_defaults(1)
        }
    }

    /// `F(x) = x + 1` on `[0, 1]`: sharp inner problem with modulus 1 and a
    /// nontrivial trajectory.
    pub fn sharp_drift_1d() -> Self {
        ToyConfig {
            symmetric: 1.0,
            drift: 1.0,
            ..ToyConfig::deterministic_defaults(1)
        }
    }

    /// Rotation about an interior center with an off-center outer target;
    /// smooth, deterministic, with a singleton inner solution set.
    pub fn interior_rotation_2d() -> Self {
        ToyConfig {
            rotation: 1.0,
            center: Some(vec![0.5, 0.5]),
            target: Some(vec![0.9, 0.6]),
            ..ToyConfig::deterministic_defaults(2)
        }
    }

    pub fn center_point(&self) -> Point {
        match &self.center {
            Some(c) => Point::new(c.clone()),
            None => Point::zeros(self.n),
        }
    }

    pub fn target_point(&self) -> Point {
        match &self.target {
            Some(t) => Point::new(t.clone()),
            None => Point::filled(self.n, 0.3),
        }
    }

    /// `A(x - c) + s(x - c) + b`, the exact inner mean.
    pub fn inner_mean(&self, x: &Point) -> Point {
        let c = self.center_point();
        let mut out = Point::zeros(self.n);
        for i in 0..self.n {
            out[i] = self.symmetric * (x[i] - c[i]) + self.drift;
        }
        let pairs = self.n / 2;
        for p in 0..pairs {
            let (i, j) = (2 * p, 2 * p + 1);
            out[i] += self.rotation * (x[j] - c[j]);
            out[j] -= self.rotation * (x[i] - c[i]);
        }
        out
    }

    pub fn outer_mean(&self, x: &Point) -> Point {
        x.sub(&self.target_point())
    }

    fn lipschitz_inner(&self) -> f64 {
        if self.n >= 2 {
            (self.rotation * self.rotation + self.symmetric * self.symmetric).sqrt()
        } else {
            self.symmetric.abs()
        }
    }

    /// Per-coordinate inner solution intervals when there is no rotation.
    fn separable_inner_solution(&self) -> Option<(Point, Point)> {
        if self.rotation != 0.0 {
            return None;
        }
        let c = self.center_point();
        let mut lo = Point::zeros(self.n);
        let mut hi = Point::zeros(self.n);
        for i in 0..self.n {
            if self.symmetric > 0.0 {
                let root = (c[i] - self.drift / self.symmetric)
                    .max(self.lower)
                    .min(self.upper);
                lo[i] = root;
                hi[i] = root;
            } else if self.drift > 0.0 {
                lo[i] = self.lower;
                hi[i] = self.lower;
            } else if self.drift < 0.0 {
                lo[i] = self.upper;
                hi[i] = self.upper;
            } else {
                lo[i] = self.lower;
                hi[i] = self.upper;
            }
        }
        Some((lo, hi))
    }

    fn inner_solution_set(&self) -> Option<FeasibleSet> {
        if let Some((lo, hi)) = self.separable_inner_solution() {
            return FeasibleSet::box_set(lo, hi).ok();
        }
        // Rotation with positive identity part, or about a strictly interior
        // center, pins the solution to the center.
        let c = self.center_point();
        let interior = c
            .as_slice()
            .iter()
            .all(|v| *v > self.lower && *v < self.upper);
        let in_box = c
            .as_slice()
            .iter()
            .all(|v| *v >= self.lower && *v <= self.upper);
        if self.drift == 0.0 && ((self.symmetric > 0.0 && in_box) || interior) {
            return Some(FeasibleSet::singleton(c));
        }
        None
    }

    /// Weak-sharpness modulus, when the separable analysis yields one: the
    /// solution is a single point at which every inner coordinate is
    /// strictly positive.
    fn sharpness(&self) -> Option<f64> {
        let (lo, hi) = self.separable_inner_solution()?;
        if lo != hi {
            return None;
        }
        let f = self.inner_mean(&lo);
        let min = f.as_slice().iter().cloned().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            Some(min)
        } else {
            None
        }
    }
}

/// Quick constructor: pairwise rotation about the origin on the unit box
/// with the outer target at `0.3` per coordinate. In one dimension the skew
/// part is empty and the inner operator vanishes.
pub fn skew_toy(n: usize, noise_f: f64, noise_h: f64) -> ProblemInstance {
    toy_problem(ToyConfig {
        rotation: if n >= 2 { 1.0 } else { 0.0 },
        noise_f,
        noise_h,
        ..ToyConfig::deterministic_defaults(n)
    })
    .expect("toy defaults are valid")
}

pub fn toy_problem(config: ToyConfig) -> Result<ProblemInstance> {
    if config.n == 0 {
        return Err(CoreError::InvalidArgument(
            "toy dimension must be >= 1".into(),
        ));
    }
    if config.lower >= config.upper {
        return Err(CoreError::InvalidArgument(
            "toy box must have lower < upper".into(),
        ));
    }
    let n = config.n;
    let set = FeasibleSet::box_set(
        Point::filled(n, config.lower),
        Point::filled(n, config.upper),
    )?;

    let cfg_f = config.clone();
    let inner = if config.noise_f > 0.0 {
        StochasticOracle::with_gaussian_noise(
            n,
            move |x: &Point| cfg_f.inner_mean(x),
            vec![config.noise_f; n],
        )
    } else {
        StochasticOracle::deterministic(n, move |x: &Point| cfg_f.inner_mean(x))
    };
    let cfg_h = config.clone();
    let outer = if config.noise_h > 0.0 {
        StochasticOracle::with_gaussian_noise(
            n,
            move |x: &Point| cfg_h.outer_mean(x),
            vec![config.noise_h; n],
        )
    } else {
        StochasticOracle::deterministic(n, move |x: &Point| cfg_h.outer_mean(x))
    };

    let target = config.target_point();
    let center = config.center_point();
    // farthest box corner from a point, coordinatewise
    let far = |p: &Point| -> f64 {
        (0..n)
            .map(|i| {
                let d = (p[i] - config.lower).abs().max((p[i] - config.upper).abs());
                d * d
            })
            .sum::<f64>()
            .sqrt()
    };
    let c_f = config.lipschitz_inner() * far(&center) + config.drift.abs() * (n as f64).sqrt();
    let c_h = far(&target);

    let inner_solution_set = config.inner_solution_set();
    let outer_solution = inner_solution_set
        .as_ref()
        .and_then(|s| s.project(&target).ok());
    let b_h = inner_solution_set.as_ref().map(|s| {
        let (lo, hi) = s.bounds();
        (0..n)
            .map(|i| {
                let hi_i = hi[i].unwrap_or(f64::INFINITY);
                let d = (target[i] - lo[i]).abs().max((target[i] - hi_i).abs());
                d * d
            })
            .sum::<f64>()
            .sqrt()
    });
    let h_at_xstar_norm = outer_solution.as_ref().map(|xs| xs.distance_to(&target));

    let constants = ProblemConstants {
        l_f: config.lipschitz_inner(),
        l_h: 1.0,
        m_f: 0.0,
        m_h: 0.0,
        sigma_f: config.noise_f * (n as f64).sqrt(),
        sigma_h: config.noise_h * (n as f64).sqrt(),
        mu_h: 1.0,
        c_f: Some(c_f),
        c_h: Some(c_h),
        b_f: None,
        b_h,
        alpha: config.sharpness(),
        h_at_xstar_norm,
    };

    let default_start = set.anchor();
    Ok(ProblemInstance {
        name: format!("toy-{n}d"),
        set,
        inner,
        outer,
        constants,
        references: References {
            inner_solution_set,
            outer_solution,
            computed: None,
        },
        kind: ProblemKind::Toy(config),
        default_start,
    })
}
