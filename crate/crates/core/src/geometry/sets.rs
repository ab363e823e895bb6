use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::sampling::{sample_tangent_sphere, sample_unit_sphere};
use super::{check_point, GeometryError, Point};

/// Slack allowed on `Σx = 1` when testing simplex membership.
pub const SIMPLEX_SUM_TOLERANCE: f64 = 1e-9;

/// Relative slack within which an almost-feasible point is snapped back
/// into the set instead of being rejected.
const SNAP_TOLERANCE: f64 = 1e-12;

/// Origin-centred Euclidean ball of diameter `D` with an inscribed radius `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSet {
    dim: usize,
    radius: f64,
    inner_radius: f64,
    shrink: f64,
}

impl BallSet {
    pub fn new(dim: usize, diameter: f64, inner_radius: f64) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::InvalidDimension(dim));
        }
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "diameter must be positive, got {diameter}"
            )));
        }
        let radius = diameter / 2.0;
        if !(inner_radius > 0.0 && inner_radius <= radius) {
            return Err(GeometryError::InvalidParameter(format!(
                "inner radius must lie in (0, D/2] = (0, {radius}], got {inner_radius}"
            )));
        }
        Ok(Self {
            dim,
            radius,
            inner_radius,
            shrink: 0.0,
        })
    }

    pub fn with_shrink(mut self, gamma: f64) -> Result<Self, GeometryError> {
        check_shrink(gamma)?;
        self.shrink = gamma;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Radius `D/2`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn shrink(&self) -> f64 {
        self.shrink
    }

    /// Radius of `(1-γ)P`.
    pub fn shrunken_radius(&self) -> f64 {
        (1.0 - self.shrink) * self.radius
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.len() == self.dim && x.norm() <= self.radius
    }

    pub fn contains_shrunken(&self, x: &Point) -> bool {
        x.len() == self.dim && x.norm() <= self.shrunken_radius()
    }
}

/// The probability simplex `{x ≥ 0, Σx = 1}`; shrinking contracts it toward
/// the barycenter, which gives `x_i ≥ γ/d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexSet {
    dim: usize,
    shrink: f64,
}

impl SimplexSet {
    pub fn new(dim: usize) -> Result<Self, GeometryError> {
        // A single-asset simplex is a point; there is no room to perturb.
        if dim < 2 {
            return Err(GeometryError::InvalidDimension(dim));
        }
        Ok(Self { dim, shrink: 0.0 })
    }

    pub fn with_shrink(mut self, gamma: f64) -> Result<Self, GeometryError> {
        check_shrink(gamma)?;
        self.shrink = gamma;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shrink(&self) -> f64 {
        self.shrink
    }

    pub fn diameter(&self) -> f64 {
        std::f64::consts::SQRT_2
    }

    /// Radius of the largest ball (within the affine hull) centred at the
    /// barycenter that fits in the simplex.
    pub fn inner_radius(&self) -> f64 {
        let d = self.dim as f64;
        1.0 / (d * (d - 1.0)).sqrt()
    }

    pub fn barycenter(&self) -> Point {
        Point::from_element(self.dim, 1.0 / self.dim as f64)
    }

    /// Per-coordinate lower bound of `(1-γ)P`.
    pub fn shrunken_lower_bound(&self) -> f64 {
        self.shrink / self.dim as f64
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.contains_with_floor(x, 0.0)
    }

    pub fn contains_shrunken(&self, x: &Point) -> bool {
        self.contains_with_floor(x, self.shrunken_lower_bound())
    }

    fn contains_with_floor(&self, x: &Point, floor: f64) -> bool {
        x.len() == self.dim && x.iter().all(|&c| c >= floor) && (x.sum() - 1.0).abs() <= SIMPLEX_SUM_TOLERANCE
    }
}

fn check_shrink(gamma: f64) -> Result<(), GeometryError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(GeometryError::InvalidParameter(format!("shrink must lie in [0, 1), got {gamma}")));
    }
    Ok(())
}

/// A feasible set together with its shrink factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeasibleSet {
    Ball(BallSet),
    Simplex(SimplexSet),
}

impl FeasibleSet {
    pub fn ball(dim: usize, diameter: f64, inner_radius: f64) -> Result<Self, GeometryError> {
        BallSet::new(dim, diameter, inner_radius).map(Self::Ball)
    }

    pub fn simplex(dim: usize) -> Result<Self, GeometryError> {
        SimplexSet::new(dim).map(Self::Simplex)
    }

    pub fn with_shrink(&self, gamma: f64) -> Result<Self, GeometryError> {
        match self {
            Self::Ball(b) => b.clone().with_shrink(gamma).map(Self::Ball),
            Self::Simplex(s) => s.clone().with_shrink(gamma).map(Self::Simplex),
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            Self::Ball(b) => b.dim(),
            Self::Simplex(s) => s.dim(),
        }
    }

    /// Dimension of the affine hull, which is where perturbations live.
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Self::Ball(b) => b.dim(),
            Self::Simplex(s) => s.dim() - 1,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Ball(b) => b.diameter(),
            Self::Simplex(s) => s.diameter(),
        }
    }

    pub fn inner_radius(&self) -> f64 {
        match self {
            Self::Ball(b) => b.inner_radius(),
            Self::Simplex(s) => s.inner_radius(),
        }
    }

    pub fn shrink(&self) -> f64 {
        match self {
            Self::Ball(b) => b.shrink(),
            Self::Simplex(s) => s.shrink(),
        }
    }

    /// Centre of the inscribed ball: the origin or the barycenter.
    pub fn center(&self) -> Point {
        match self {
            Self::Ball(b) => Point::zeros(b.dim()),
            Self::Simplex(s) => s.barycenter(),
        }
    }

    /// Largest Euclidean norm of a point in the full set.
    pub fn max_norm(&self) -> f64 {
        match self {
            Self::Ball(b) => b.radius(),
            Self::Simplex(_) => 1.0,
        }
    }

    /// `sup_{x ∈ P} |⟨x, z⟩|`.
    pub fn max_abs_inner(&self, z: &Point) -> f64 {
        match self {
            Self::Ball(b) => b.radius() * z.norm(),
            Self::Simplex(_) => z.amax(),
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        match self {
            Self::Ball(b) => b.contains(x),
            Self::Simplex(s) => s.contains(x),
        }
    }

    pub fn contains_shrunken(&self, x: &Point) -> bool {
        match self {
            Self::Ball(b) => b.contains_shrunken(x),
            Self::Simplex(s) => s.contains_shrunken(x),
        }
    }

    /// Uniform unit direction in the subspace parallel to the set's affine
    /// hull: the full sphere for a ball, the zero-sum sphere for a simplex.
    pub fn sample_direction(&self, rng: &mut dyn RngCore) -> Point {
        match self {
            Self::Ball(b) => sample_unit_sphere(b.dim(), rng).expect("ball dimension is positive"),
            Self::Simplex(s) => sample_tangent_sphere(s.dim(), rng).expect("simplex dimension is at least 2"),
        }
    }

    /// Pulls a point that sits outside the full set by rounding error back
    /// onto it. Anything further out is rejected with the violated margin.
    pub fn snap_into(&self, x: Point) -> Result<Point, GeometryError> {
        check_point(&x, self.dim())?;
        if self.contains(&x) {
            return Ok(x);
        }
        match self {
            Self::Ball(b) => {
                let norm = x.norm();
                if norm > b.radius() * (1.0 + SNAP_TOLERANCE) {
                    return Err(GeometryError::InvalidParameter(format!(
                        "point lies outside the ball by {:e}",
                        norm - b.radius()
                    )));
                }
                Ok(scale_into_ball(x, b.radius()))
            }
            Self::Simplex(_) => {
                let worst = x.min();
                if worst < -SNAP_TOLERANCE || (x.sum() - 1.0).abs() > 1e3 * SIMPLEX_SUM_TOLERANCE {
                    return Err(GeometryError::InvalidParameter(format!(
                        "point lies outside the simplex (min coordinate {worst:e}, sum {})",
                        x.sum()
                    )));
                }
                let clipped = x.map(|c| c.max(0.0));
                let total = clipped.sum();
                Ok(clipped / total)
            }
        }
    }
}

/// Scales `x` radially until `‖x‖ ≤ radius` holds in floating point.
pub(crate) fn scale_into_ball(x: Point, radius: f64) -> Point {
    let norm = x.norm();
    if norm <= radius {
        return x;
    }
    let mut scaled = &x * (radius / norm);
    let mut factor = 1.0;
    while scaled.norm() > radius {
        factor *= 1.0 - 4.0 * f64::EPSILON;
        scaled = &x * (factor * radius / norm);
    }
    scaled
}
