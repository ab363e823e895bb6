use rand::RngCore;

use super::{expect_gradient, Algorithm, Feedback, LearnerError, OnlineLearner};
use crate::geometry::{check_point, generalized_project, CurvatureState, FeasibleSet, Point};

/// Full-information Online Newton Step: `A_t = A_{t-1} + ∇_t∇_tᵀ`,
/// `y_{t+1} = Π^{A_t}_P(y_t − (1/β) A_t⁻¹ ∇_t)`, with `A_0 = εI` and
/// `ε = 1/(β²D²)`. No shrinking, no perturbation.
#[derive(Debug, Clone)]
pub struct Ons {
    set: FeasibleSet,
    beta: f64,
    curvature: CurvatureState,
    y: Point,
    t: u64,
    pending: bool,
}

impl Ons {
    pub fn new(set: &FeasibleSet, beta: f64) -> Result<Self, LearnerError> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(LearnerError::Config(format!("beta must be positive, got {beta}")));
        }
        let set = set.with_shrink(0.0)?;
        let d = set.diameter();
        let epsilon = 1.0 / (beta * beta * d * d);
        let curvature = CurvatureState::new(set.dim(), epsilon)?;
        Ok(Self {
            y: set.center(),
            set,
            beta,
            curvature,
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

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn curvature(&self) -> &CurvatureState {
        &self.curvature
    }
}

impl OnlineLearner for Ons {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Ons
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
        self.curvature.rank_one_update(grad)?;
        let z = &self.y - self.curvature.apply_inverse(grad) / self.beta;
        self.y = generalized_project(&self.set, self.curvature.matrix(), &z)?;
        self.t += 1;
        Ok(())
    }

    fn iterate(&self) -> &Point {
        &self.y
    }

    fn rounds(&self) -> u64 {
        self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_gradient_keeps_iterate() {
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        let mut l = Ons::new(&set, 0.1).unwrap().with_start(Point::from_vec(vec![0.3, 0.3])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = l.predict(&mut rng).unwrap();
        assert_eq!(y, Point::from_vec(vec![0.3, 0.3]));
        l.update(Feedback::Gradient(&Point::zeros(2))).unwrap();
        assert_eq!(l.iterate(), &y);
    }

    #[test]
    fn first_update_inverse_closed_form() {
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        let mut l = Ons::new(&set, 0.5).unwrap();
        let eps = l.curvature().epsilon();
        assert_eq!(eps, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        l.predict(&mut rng).unwrap();
        l.update(Feedback::Gradient(&Point::from_vec(vec![1.0, 0.0]))).unwrap();
        let inv = l.curvature().inverse();
        assert!((inv[(0, 0)] - 1.0 / (eps + 1.0)).abs() < 1e-15);
        assert!((inv[(1, 1)] - 1.0 / eps).abs() < 1e-15);
        // z = −(1/β)(1/2)e₁ = −e₁, already on the boundary.
        assert!((l.iterate()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_value_feedback() {
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        let mut l = Ons::new(&set, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        l.predict(&mut rng).unwrap();
        assert!(l.update(Feedback::Value(1.0)).is_err());
        assert!(Ons::new(&set, 0.0).is_err());
    }
}
