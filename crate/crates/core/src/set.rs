use crate::error::{CoreError, Result};
use crate::point::Point;

/// The supported feasible-set geometries. Projection is componentwise
/// clamping for all of them, which keeps the proximal step closed-form.
#[derive(Clone, Debug, PartialEq)]
pub enum SetShape {
    /// `[lower, upper]` componentwise, `lower <= upper`.
    Box { lower: Point, upper: Point },
    /// `x >= 0` in the given dimension. Unbounded.
    NonnegativeOrthant(usize),
    /// `0 <= x <= upper`. A box with zero lower corner, kept as its own
    /// variant so the cap used to bound an orthant stays visible in reports.
    CappedNonnegativeBox { upper: Point },
}

/// A closed convex feasible set together with the half-diameter used by the
/// step-size formulas. For boxes the half-diameter is derived; unbounded
/// shapes must be given one explicitly before any schedule is built.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleSet {
    shape: SetShape,
    radius: Option<f64>,
}

impl FeasibleSet {
    pub fn box_set(lower: Point, upper: Point) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: lower.dim(),
                got: upper.dim(),
            });
        }
        if lower
            .as_slice()
            .iter()
            .zip(upper.as_slice())
            .any(|(l, u)| l > u)
        {
            return Err(CoreError::InvalidArgument(
                "box lower bound exceeds upper bound".into(),
            ));
        }
        let radius = upper.distance_to(&lower) / 2.0;
        Ok(FeasibleSet {
            shape: SetShape::Box { lower, upper },
            radius: Some(radius),
        })
    }

    pub fn nonnegative_orthant(dim: usize) -> Self {
        FeasibleSet {
            shape: SetShape::NonnegativeOrthant(dim),
            radius: None,
        }
    }

    pub fn capped_nonnegative(upper: Point) -> Result<Self> {
        if upper.as_slice().iter().any(|u| *u < 0.0) {
            return Err(CoreError::InvalidArgument("cap must be nonnegative".into()));
        }
        let radius = upper.norm() / 2.0;
        Ok(FeasibleSet {
            shape: SetShape::CappedNonnegativeBox { upper },
            radius: Some(radius),
        })
    }

    /// Degenerate box `{point}`, used to describe singleton solution sets.
    pub fn singleton(point: Point) -> Self {
        FeasibleSet {
            radius: Some(0.0),
            shape: SetShape::Box {
                lower: point.clone(),
                upper: point,
            },
        }
    }

    /// Overrides the half-diameter. Required for unbounded shapes.
    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(CoreError::InvalidArgument("radius must be positive".into()));
        }
        self.radius = Some(radius);
        Ok(self)
    }

    pub fn shape(&self) -> &SetShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            SetShape::Box { lower, .. } => lower.dim(),
            SetShape::NonnegativeOrthant(n) => *n,
            SetShape::CappedNonnegativeBox { upper } => upper.dim(),
        }
    }

    /// Half the Euclidean diameter, if known.
    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn require_radius(&self) -> Result<f64> {
        self.radius.ok_or(CoreError::RadiusUnavailable)
    }

    /// Componentwise bounds as `(lower, upper)` with `None` for +inf.
    pub fn bounds(&self) -> (Vec<f64>, Vec<Option<f64>>) {
        match &self.shape {
            SetShape::Box { lower, upper } => (
                lower.as_slice().to_vec(),
                upper.as_slice().iter().map(|u| Some(*u)).collect(),
            ),
            SetShape::NonnegativeOrthant(n) => (vec![0.0; *n], vec![None; *n]),
            SetShape::CappedNonnegativeBox { upper } => (
                vec![0.0; upper.dim()],
                upper.as_slice().iter().map(|u| Some(*u)).collect(),
            ),
        }
    }

    /// Euclidean projection. Componentwise clamp for every supported shape.
    pub fn project(&self, y: &Point) -> Result<Point> {
        y.check_dim(self.dim())?;
        let mut out = y.clone();
        match &self.shape {
            SetShape::Box { lower, upper } => {
                for i in 0..out.dim() {
                    out[i] = out[i].clamp(lower[i], upper[i]);
                }
            }
            SetShape::NonnegativeOrthant(_) => {
                for i in 0..out.dim() {
                    out[i] = out[i].max(0.0);
                }
            }
            SetShape::CappedNonnegativeBox { upper } => {
                for i in 0..out.dim() {
                    out[i] = out[i].clamp(0.0, upper[i]);
                }
            }
        }
        Ok(out)
    }

    /// Distance from `y` to the set, `||y - proj(y)||`.
    pub fn distance(&self, y: &Point) -> Result<f64> {
        let p = self.project(y)?;
        Ok(y.distance_to(&p))
    }

    pub fn contains(&self, y: &Point, tol: f64) -> bool {
        match self.distance(y) {
            Ok(d) => d <= tol,
            Err(_) => false,
        }
    }

    /// Midpoint for bounded shapes, all-ones for the orthant. Used as the
    /// fallback starting point when a run does not specify one.
    pub fn anchor(&self) -> Point {
        match &self.shape {
            SetShape::Box { lower, upper } => Point::new(
                lower
                    .as_slice()
                    .iter()
                    .zip(upper.as_slice())
                    .map(|(l, u)| 0.5 * (l + u))
                    .collect(),
            ),
            SetShape::NonnegativeOrthant(n) => Point::ones(*n),
            SetShape::CappedNonnegativeBox { upper } => {
                Point::new(upper.as_slice().iter().map(|u| 0.5 * u).collect())
            }
        }
    }
}
