//! Feasible sets, direction sampling, projections and the curvature matrix
//! maintained by the Newton-style learners.
//!
//! Points are plain `nalgebra` column vectors. Two set geometries are
//! supported: an origin-centred Euclidean ball and the probability simplex.
//! Both carry a shrink factor `γ` so the learners can keep their centre
//! inside `(1-γ)P` while perturbed queries stay inside `P`.

mod curvature;
mod projection;
mod sampling;
mod sets;

pub use curvature::{CurvatureState, REFRESH_INTERVAL};
pub use projection::{euclidean_project, generalized_project, MAX_INNER_ITERATIONS, OBJECTIVE_TOLERANCE};
pub use sampling::{sample_tangent_sphere, sample_unit_ball, sample_unit_sphere};
pub use sets::{BallSet, FeasibleSet, SimplexSet, SIMPLEX_SUM_TOLERANCE};

use nalgebra::DVector;
use thiserror::Error;

/// A decision vector in `R^d`.
pub type Point = DVector<f64>;

#[derive(Debug, Clone, Error)]
pub enum GeometryError {
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point has non-finite coordinates")]
    NonFinite,
    #[error("invalid set parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("rank-one update denominator {0:e} is not positive")]
    DegenerateUpdate(f64),
    #[error("projection did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { best: Point, residual: f64, iterations: usize },
}

/// Checks that `x` has `dim` finite coordinates.
pub fn check_point(x: &Point, dim: usize) -> Result<(), GeometryError> {
    if x.len() != dim {
        return Err(GeometryError::DimensionMismatch {
            expected: dim,
            found: x.len(),
        });
    }
    if x.iter().any(|c| !c.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    Ok(())
}
