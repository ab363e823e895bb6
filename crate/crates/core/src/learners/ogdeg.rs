use rand::RngCore;

use super::{expect_value, Algorithm, Feedback, LearnerError, OnlineLearner, Schedule};
use crate::estimator::{one_point_gradient, perturb_within};
use crate::geometry::{check_point, euclidean_project, FeasibleSet, Point};

/// Projected gradient descent on one-point estimates with step
/// `ν_t = D/(F√t)`, kept inside `(1-γ)P`.
#[derive(Debug, Clone)]
pub struct Ogdeg {
    set: FeasibleSet,
    schedule: Schedule,
    y: Point,
    t: u64,
    pending: Option<Point>,
}

impl Ogdeg {
    pub fn new(set: &FeasibleSet, schedule: Schedule) -> Result<Self, LearnerError> {
        if schedule.dim != set.intrinsic_dim() {
            return Err(LearnerError::Config(format!(
                "schedule dimension {} does not match the set's dimension {}",
                schedule.dim,
                set.intrinsic_dim()
            )));
        }
        let set = set.with_shrink(schedule.gamma)?;
        Ok(Self {
            y: set.center(),
            set,
            schedule,
            t: 0,
            pending: None,
        })
    }

    pub fn with_start(mut self, y: Point) -> Result<Self, LearnerError> {
        check_point(&y, self.set.dim())?;
        if !self.set.contains_shrunken(&y) {
            return Err(LearnerError::Config("start point lies outside the shrunken set".into()));
        }
        self.y = y;
        Ok(self)
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn predict_along(&mut self, direction: Point) -> Result<Point, LearnerError> {
        if self.pending.is_some() {
            return Err(LearnerError::Protocol("predict called twice without an update"));
        }
        check_point(&direction, self.set.dim())?;
        let query = perturb_within(&self.set, &self.y, self.schedule.delta, &direction)?;
        self.pending = Some(direction);
        Ok(query)
    }
}

impl OnlineLearner for Ogdeg {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Ogdeg
    }

    fn predict(&mut self, rng: &mut dyn RngCore) -> Result<Point, LearnerError> {
        if self.pending.is_some() {
            return Err(LearnerError::Protocol("predict called twice without an update"));
        }
        let v = self.set.sample_direction(rng);
        self.predict_along(v)
    }

    fn update(&mut self, feedback: Feedback<'_>) -> Result<(), LearnerError> {
        let fval = expect_value(feedback)?;
        let direction = self
            .pending
            .take()
            .ok_or(LearnerError::Protocol("update called without a pending prediction"))?;
        let g = one_point_gradient(fval, &direction, self.schedule.dim, self.schedule.delta)?;
        self.t += 1;
        let step = self.schedule.bandit_gradient_step(self.t);
        let z = &self.y - g * step;
        self.y = euclidean_project(&self.set, &z, true)?;
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

    fn learner() -> Ogdeg {
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        let schedule = Schedule::for_bounded_losses(2, 1.0, 2.0, 1.0, 1.0, 10_000).unwrap();
        Ogdeg::new(&set, schedule).unwrap()
    }

    #[test]
    fn zero_loss_keeps_iterate() {
        let mut l = learner().with_start(Point::from_vec(vec![0.1, 0.2])).unwrap();
        l.predict_along(Point::from_vec(vec![0.0, 1.0])).unwrap();
        l.update(Feedback::Value(0.0)).unwrap();
        assert_eq!(l.iterate(), &Point::from_vec(vec![0.1, 0.2]));
    }

    #[test]
    fn one_round_by_hand() {
        let mut l = learner();
        let s = l.schedule().clone();
        l.predict_along(Point::from_vec(vec![0.6, 0.8])).unwrap();
        l.update(Feedback::Value(0.25)).unwrap();
        // ν_1 = D/F = 2; g = (2/δ)(0.25)(0.6, 0.8).
        let scale = 2.0 * (2.0 / s.delta) * 0.25;
        let (zx, zy) = (-scale * 0.6, -scale * 0.8);
        let norm = (zx * zx + zy * zy).sqrt();
        let radius = 1.0 - s.gamma;
        let (ex, ey) = if norm > radius {
            (zx * radius / norm, zy * radius / norm)
        } else {
            (zx, zy)
        };
        assert!((l.iterate()[0] - ex).abs() < 1e-12);
        assert!((l.iterate()[1] - ey).abs() < 1e-12);
    }

    #[test]
    fn protocol_errors() {
        let mut l = learner();
        assert!(l.update(Feedback::Value(1.0)).is_err());
        l.predict_along(Point::from_vec(vec![1.0, 0.0])).unwrap();
        assert!(l.predict_along(Point::from_vec(vec![1.0, 0.0])).is_err());
    }
}
