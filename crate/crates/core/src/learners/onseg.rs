use rand::RngCore;

use super::{expect_value, Algorithm, Feedback, LearnerError, OnlineLearner, Schedule};
use crate::estimator::{one_point_gradient, perturb_within};
use crate::geometry::{check_point, generalized_project, CurvatureState, FeasibleSet, Point};

#[derive(Debug, Clone)]
struct Pending {
    direction: Point,
    query: Point,
}

/// Online Newton Step driven by one-point gradient estimates.
///
/// Each round plays `x_t = y_t + δv_t` for a uniform unit `v_t`, forms
/// `g_t = (d/δ) f_t(x_t) v_t`, adds `g_tg_tᵀ` to `A`, and moves to the
/// `A`-norm projection of `y_t − (1/β) A⁻¹ g_t` onto `(1-γ)P`.
#[derive(Debug, Clone)]
pub struct Onseg {
    set: FeasibleSet,
    schedule: Schedule,
    curvature: CurvatureState,
    y: Point,
    t: u64,
    pending: Option<Pending>,
    warned_bound: bool,
}

impl Onseg {
    /// Starts at the centre of `set` (the origin for a ball) with `A_0 = εI`.
    pub fn new(set: &FeasibleSet, schedule: Schedule) -> Result<Self, LearnerError> {
        if schedule.dim != set.intrinsic_dim() {
            return Err(LearnerError::Config(format!(
                "schedule dimension {} does not match the set's dimension {}",
                schedule.dim,
                set.intrinsic_dim()
            )));
        }
        if schedule.delta > schedule.gamma * set.inner_radius() * (1.0 + 1e-12) {
            return Err(LearnerError::Config(format!(
                "delta {} exceeds gamma·r = {} for this set",
                schedule.delta,
                schedule.gamma * set.inner_radius()
            )));
        }
        let set = set.with_shrink(schedule.gamma)?;
        let curvature = CurvatureState::new(set.dim(), schedule.epsilon)?;
        Ok(Self {
            y: set.center(),
            set,
            schedule,
            curvature,
            t: 0,
            pending: None,
            warned_bound: false,
        })
    }

    /// Moves the centre to `y`, which must lie in `(1-γ)P`.
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

    pub fn curvature(&self) -> &CurvatureState {
        &self.curvature
    }

    /// The feasible set with this learner's shrink applied.
    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn has_pending(&self) -> bool {
        self.pending.is_some()
    }

    /// Plays `y_t + δv` for a caller-chosen unit direction `v`.
    pub fn predict_along(&mut self, direction: Point) -> Result<Point, LearnerError> {
        if self.pending.is_some() {
            return Err(LearnerError::Protocol("predict called twice without an update"));
        }
        check_point(&direction, self.set.dim())?;
        let query = perturb_within(&self.set, &self.y, self.schedule.delta, &direction)?;
        self.pending = Some(Pending {
            direction,
            query: query.clone(),
        });
        Ok(query)
    }

    /// The point most recently played and not yet answered.
    pub fn pending_query(&self) -> Option<&Point> {
        self.pending.as_ref().map(|p| &p.query)
    }
}

impl OnlineLearner for Onseg {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Onseg
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
        let pending = self
            .pending
            .take()
            .ok_or(LearnerError::Protocol("update called without a pending prediction"))?;
        if fval.abs() > self.schedule.loss_bound && !self.warned_bound {
            log::warn!(
                "observed |f| = {} exceeds the loss bound F = {}; the schedule is not rescaled",
                fval.abs(),
                self.schedule.loss_bound
            );
            self.warned_bound = true;
        }
        let g = one_point_gradient(fval, &pending.direction, self.schedule.dim, self.schedule.delta)?;
        self.curvature.rank_one_update(&g)?;
        let z = &self.y - self.curvature.apply_inverse(&g) / self.schedule.beta;
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
