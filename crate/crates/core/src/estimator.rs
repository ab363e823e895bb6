//! One-point gradient estimation from a single loss evaluation, and a
//! Monte-Carlo evaluator of the ball-smoothed loss it is unbiased for.

use rand::RngCore;
use thiserror::Error;

use crate::geometry::{sample_unit_ball, FeasibleSet, GeometryError, Point};

/// How far from unit length a direction may be.
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum EstimatorError {
    #[error("perturbation radius must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error("direction is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("perturbed point leaves the feasible set: {0}")]
    Infeasible(String),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One round's gradient estimate together with the quantities it was built
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub g: Point,
    pub query: Point,
    pub direction: Point,
    pub observed_value: f64,
    pub delta: f64,
    /// Dimension factor used in the `d/δ` scaling.
    pub dim: usize,
}

impl GradientEstimate {
    pub fn new(query: Point, direction: Point, observed_value: f64, dim: usize, delta: f64) -> Result<Self, EstimatorError> {
        let g = one_point_gradient(observed_value, &direction, dim, delta)?;
        Ok(Self {
            g,
            query,
            direction,
            observed_value,
            delta,
            dim,
        })
    }
}

fn check_delta(delta: f64) -> Result<(), EstimatorError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(EstimatorError::InvalidDelta(delta));
    }
    Ok(())
}

fn check_unit(v: &Point) -> Result<(), EstimatorError> {
    let norm = v.norm();
    if !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
        return Err(EstimatorError::NotUnit(norm));
    }
    Ok(())
}

/// `y + δv`.
pub fn perturb(y: &Point, delta: f64, v: &Point) -> Result<Point, EstimatorError> {
    check_delta(delta)?;
    check_unit(v)?;
    if y.len() != v.len() {
        return Err(EstimatorError::DimensionMismatch {
            expected: y.len(),
            found: v.len(),
        });
    }
    Ok(y + v * delta)
}

/// `y + δv`, additionally asserting the result lies in `set`. Points that
/// miss only by rounding are snapped onto the set.
pub fn perturb_within(set: &FeasibleSet, y: &Point, delta: f64, v: &Point) -> Result<Point, EstimatorError> {
    let x = perturb(y, delta, v)?;
    set.snap_into(x).map_err(|e| EstimatorError::Infeasible(e.to_string()))
}

/// `g = (d/δ)·f·v`.
pub fn one_point_gradient(fval: f64, v: &Point, d: usize, delta: f64) -> Result<Point, EstimatorError> {
    check_delta(delta)?;
    check_unit(v)?;
    Ok(v * (d as f64 / delta * fval))
}

/// Sample mean and standard error of `f(x + δu)` over `n` uniform draws `u`
/// from the unit ball. Only meant as a reference for tests.
pub fn smoothed_value_mc<F>(f: F, x: &Point, delta: f64, n: usize, rng: &mut dyn RngCore) -> Result<(f64, f64), EstimatorError>
where
    F: Fn(&Point) -> f64,
{
    if n < 2 {
        return Err(EstimatorError::TooFewSamples(n));
    }
    let d = x.len();
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 1..=n {
        let u = sample_unit_ball(d, rng)?;
        let value = f(&(x + u * delta));
        let diff = value - mean;
        mean += diff / k as f64;
        m2 += diff * (value - mean);
    }
    let variance = m2 / (n - 1) as f64;
    Ok((mean, (variance / n as f64).sqrt()))
}
