//! Online learners sharing one predict/update protocol.
//!
//! Bandit learners ([`Onseg`], [`Ogdeg`]) see only the loss value at the
//! point they queried. Full-information learners ([`Ons`], [`Ogd`]) see the
//! gradient at their current iterate. Every learner alternates strictly
//! between [`OnlineLearner::predict`] and [`OnlineLearner::update`].

mod ogd;
mod ogdeg;
mod ons;
mod onseg;
mod schedule;

pub use ogd::Ogd;
pub use ogdeg::Ogdeg;
pub use ons::Ons;
pub use onseg::Onseg;
pub use schedule::{full_information_beta, gradient_step, Schedule, ScheduleOverrides, GAMMA_MAX};

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::EstimatorError;
use crate::geometry::{GeometryError, Point};

#[derive(Debug, Clone, Error)]
pub enum LearnerError {
    #[error("protocol violation: {0}")]
    Protocol(&'static str),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    /// Only `f_t(x_t)` is revealed.
    Bandit,
    /// `∇f_t` at the played point is revealed.
    FullInformation,
}

#[derive(Debug, Clone, Copy)]
pub enum Feedback<'a> {
    Value(f64),
    Gradient(&'a Point),
}

pub trait OnlineLearner: Send {
    fn algorithm(&self) -> Algorithm;

    fn feedback_kind(&self) -> FeedbackKind {
        self.algorithm().feedback_kind()
    }

    /// Point to play this round.
    fn predict(&mut self, rng: &mut dyn RngCore) -> Result<Point, LearnerError>;

    /// Consumes the feedback for the last prediction.
    fn update(&mut self, feedback: Feedback<'_>) -> Result<(), LearnerError>;

    /// Current centre `y_t`.
    fn iterate(&self) -> &Point;

    /// Number of completed updates.
    fn rounds(&self) -> u64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Onseg,
    Ogdeg,
    Ons,
    Ogd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Onseg, Algorithm::Ogdeg, Algorithm::Ons, Algorithm::Ogd];

    pub fn feedback_kind(self) -> FeedbackKind {
        match self {
            Algorithm::Onseg | Algorithm::Ogdeg => FeedbackKind::Bandit,
            Algorithm::Ons | Algorithm::Ogd => FeedbackKind::FullInformation,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Onseg => "onseg",
            Algorithm::Ogdeg => "ogdeg",
            Algorithm::Ons => "ons",
            Algorithm::Ogd => "ogd",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "onseg" => Ok(Algorithm::Onseg),
            "ogdeg" => Ok(Algorithm::Ogdeg),
            "ons" => Ok(Algorithm::Ons),
            "ogd" => Ok(Algorithm::Ogd),
            other => Err(format!("unknown algorithm '{other}' (expected onseg, ogdeg, ons or ogd)")),
        }
    }
}

pub(crate) fn expect_value(feedback: Feedback<'_>) -> Result<f64, LearnerError> {
    match feedback {
        Feedback::Value(v) if v.is_finite() => Ok(v),
        Feedback::Value(_) => Err(LearnerError::Protocol("loss value is not finite")),
        Feedback::Gradient(_) => Err(LearnerError::Protocol("bandit learner received a gradient")),
    }
}

pub(crate) fn expect_gradient<'a>(feedback: Feedback<'a>, dim: usize) -> Result<&'a Point, LearnerError> {
    match feedback {
        Feedback::Gradient(g) => {
            crate::geometry::check_point(g, dim)?;
            Ok(g)
        }
        Feedback::Value(_) => Err(LearnerError::Protocol("full-information learner received a loss value")),
    }
}
