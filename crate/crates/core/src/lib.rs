//! Bandit convex optimization with second-order updates.
//!
//! The main learner queries a randomly perturbed point each round, sees
//! only the scalar loss there, builds a one-point gradient estimate, and
//! takes an Online Newton Step on it with the inverse Hessian proxy kept
//! current by rank-one updates. Baselines, loss families, an experiment
//! harness and brute-force reference oracles live alongside.

// Guards like `!(x > 0.0)` are written that way so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod estimator;
pub mod geometry;
pub mod harness;
pub mod learners;
pub mod losses;
pub mod oracles;
