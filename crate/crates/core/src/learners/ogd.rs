use rand::RngCore;

use super::{expect_gradient, gradient_step, Algorithm, Feedback, LearnerError, OnlineLearner};
use crate::geometry::{check_point, euclidean_project, FeasibleSet, Point};

/// Projected online gradient descent with `η_t = D/(G√t)`.
#[derive(Debug, Clone)]
pub struct Ogd {
    set: FeasibleSet,
    grad_bound: f64,
    y: Point,
    t: u64,
    pending: bool,
}

impl Ogd {
    pub fn new(set: &FeasibleSet, grad_bound: f64) -> Result<Self, LearnerError> {
        if !(grad_bound.is_finite() && grad_bound > 0.0) {
            return Err(LearnerError::Config(format!("gradient bound must be positive, got {grad_bound}")));
        }
        let set = set.with_shrink(0.0)?;
        Ok(Self {
            y: set.center(),
            set,
            grad_bound,
            t: 0,
            pending: false,
        })
    }

    pub fn with_start(mut self, y: Point) -> Result<Self, LearnerError> {
        check_point(&y, self.set.dim())?;
        if !self.set.contains(&y) {
            return Err(LearnerError::Config("start point lies outside the set".into()));
        }
        self.y = y;
        Ok(self)
    }
}

impl OnlineLearner for Ogd {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Ogd
    }

    fn predict(&mut self, _rng: &mut dyn RngCore) -> Result<Point, LearnerError> {
        if self.pending {
            return Err(LearnerError::Protocol("predict called twice without an update"));
        }
        self.pending = true;
        Ok(self.y.clone())
    }

    fn update(&mut self, feedback: Feedback<'_>) -> Result<(), LearnerError> {
        let grad = expect_gradient(feedback, self.set.dim())?;
        if !self.pending {
            return Err(LearnerError::Protocol("update called without a pending prediction"));
        }
        self.pending = false;
        self.t += 1;
        let step = gradient_step(self.set.diameter(), self.grad_bound, self.t);
        self.y = euclidean_project(&self.set, &(&self.y - grad * step), false)?;
        Ok(())
    }

    fn iterate(&self) -> &Point {
        &self.y
    }

    fn rounds(&self) -> u64 {
        self.t
    }
}
