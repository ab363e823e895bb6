use serde::{Deserialize, Serialize};

use super::LearnerError;

/// Shrink factor used when the closed forms produce `γ ≥ 1`.
pub const GAMMA_MAX: f64 = 0.5;

/// Problem constants and every parameter derived from them.
///
/// `alpha`, `beta` and `epsilon` always follow from `delta` unless `beta` was
/// overridden, in which case `epsilon` follows from the override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub dim: usize,
    /// Bound `F` on `|f_t|`.
    pub loss_bound: f64,
    /// Diameter `D`.
    pub diameter: f64,
    /// Inscribed radius `r`.
    pub inner_radius: f64,
    pub sigma: f64,
    pub horizon: u64,
    pub lipschitz: Option<f64>,
    /// Full-information gradient bound `G`.
    pub grad_bound: Option<f64>,
    pub delta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub clamped: bool,
    pub beta_overridden: bool,
}

/// Optional replacements for derived parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOverrides {
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<f64, LearnerError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(LearnerError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn log_horizon(horizon: u64) -> Result<f64, LearnerError> {
    if horizon < 2 {
        return Err(LearnerError::Config(format!("horizon must be at least 2, got {horizon}")));
    }
    Ok((horizon as f64).ln())
}

impl Schedule {
    /// Parameters for bounded σ-nice losses:
    /// `δ = ∛(25 d⁴ D² ln²T · r / (3T²))`, `γ = ∛(15 d² D ln T / (rT))`.
    pub fn for_bounded_losses(
        dim: usize,
        loss_bound: f64,
        diameter: f64,
        sigma: f64,
        inner_radius: f64,
        horizon: u64,
    ) -> Result<Self, LearnerError> {
        let (d, f, big_d, r) = check_inputs(dim, loss_bound, diameter, inner_radius)?;
        positive("sigma", sigma)?;
        let log_t = log_horizon(horizon)?;
        let t = horizon as f64;
        let delta = (25.0 * d.powi(4) * big_d * big_d * log_t * log_t * r / (3.0 * t * t)).cbrt();
        let gamma = (15.0 * d * d * big_d * log_t / (r * t)).cbrt();
        Self::assemble(dim, f, big_d, r, sigma, horizon, None, delta, gamma)
    }

    /// Parameters for `L`-Lipschitz losses:
    /// `δ = T^{-1/2} √(10 d² F D r ln T / (3(Lr + F)))`, `γ = δ/r`.
    pub fn for_lipschitz_losses(
        dim: usize,
        loss_bound: f64,
        diameter: f64,
        inner_radius: f64,
        lipschitz: f64,
        horizon: u64,
        sigma: f64,
    ) -> Result<Self, LearnerError> {
        let (d, f, big_d, r) = check_inputs(dim, loss_bound, diameter, inner_radius)?;
        positive("sigma", sigma)?;
        let lip = positive("Lipschitz constant", lipschitz)?;
        let log_t = log_horizon(horizon)?;
        let t = horizon as f64;
        let delta = (10.0 * d * d * f * big_d * r * log_t / (3.0 * (lip * r + f))).sqrt() / t.sqrt();
        let gamma = delta / r;
        Self::assemble(dim, f, big_d, r, sigma, horizon, Some(lip), delta, gamma)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        dim: usize,
        loss_bound: f64,
        diameter: f64,
        inner_radius: f64,
        sigma: f64,
        horizon: u64,
        lipschitz: Option<f64>,
        delta: f64,
        gamma: f64,
    ) -> Result<Self, LearnerError> {
        let mut schedule = Self {
            dim,
            loss_bound,
            diameter,
            inner_radius,
            sigma,
            horizon,
            lipschitz,
            grad_bound: None,
            delta,
            gamma,
            alpha: 0.0,
            beta: 0.0,
            epsilon: 0.0,
            clamped: false,
            beta_overridden: false,
        };
        schedule.clamp();
        schedule.derive()?;
        Ok(schedule)
    }

    /// Enforces `δ/r ≤ γ < 1`.
    fn clamp(&mut self) {
        if !(self.gamma < 1.0) {
            self.gamma = GAMMA_MAX;
            self.clamped = true;
        }
        let max_delta = self.gamma * self.inner_radius;
        // The slack keeps `γ = δ/r` schedules from being clamped by rounding.
        if self.delta > max_delta * (1.0 + 1e-12) {
            self.delta = max_delta;
            self.clamped = true;
        }
    }

    fn derive(&mut self) -> Result<(), LearnerError> {
        let d = self.dim as f64;
        let f = self.loss_bound;
        let big_d = self.diameter;
        self.alpha = self.sigma * self.delta * self.delta / (d * d * f * f);
        if !self.beta_overridden {
            self.beta = 0.5 * (self.delta / (4.0 * d * f * big_d)).min(self.alpha);
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(LearnerError::Config(format!(
                "curvature step β = {:e} is degenerate; check σ and δ",
                self.beta
            )));
        }
        self.epsilon = 1.0 / (self.beta * self.beta * big_d * big_d);
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(LearnerError::Config(format!(
                "regulariser ε = 1/(β²D²) = {:e} is not representable",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Replaces `δ`, `γ` or `β` and re-derives the rest. The result must
    /// still satisfy `δ/r ≤ γ < 1`.
    pub fn with_overrides(mut self, overrides: &ScheduleOverrides) -> Result<Self, LearnerError> {
        if let Some(delta) = overrides.delta {
            self.delta = positive("delta", delta)?;
        }
        if let Some(gamma) = overrides.gamma {
            if !(0.0..1.0).contains(&gamma) {
                return Err(LearnerError::Config(format!("gamma must lie in [0, 1), got {gamma}")));
            }
            self.gamma = gamma;
        }
        if let Some(beta) = overrides.beta {
            self.beta = positive("beta", beta)?;
            self.beta_overridden = true;
        }
        if self.delta > self.gamma * self.inner_radius * (1.0 + 1e-12) {
            return Err(LearnerError::Config(format!(
                "delta {} exceeds gamma·r = {}; perturbed queries could leave the set",
                self.delta,
                self.gamma * self.inner_radius
            )));
        }
        self.derive()?;
        Ok(self)
    }

    pub fn with_grad_bound(mut self, grad_bound: f64) -> Result<Self, LearnerError> {
        self.grad_bound = Some(positive("gradient bound", grad_bound)?);
        Ok(self)
    }

    /// OGDEG step `ν_t = D / (F √t)`.
    pub fn bandit_gradient_step(&self, t: u64) -> f64 {
        self.diameter / (self.loss_bound * (t as f64).sqrt())
    }
}

fn check_inputs(dim: usize, loss_bound: f64, diameter: f64, inner_radius: f64) -> Result<(f64, f64, f64, f64), LearnerError> {
    if dim == 0 {
        return Err(LearnerError::Config("dimension must be positive".into()));
    }
    Ok((
        dim as f64,
        positive("loss bound F", loss_bound)?,
        positive("diameter D", diameter)?,
        positive("inner radius r", inner_radius)?,
    ))
}

/// `β` for full-information ONS: `½ min(1/(4GD), α)` with `α = σ/G²`.
pub fn full_information_beta(grad_bound: f64, diameter: f64, sigma: f64) -> Result<f64, LearnerError> {
    let g = positive("gradient bound G", grad_bound)?;
    let d = positive("diameter D", diameter)?;
    let s = positive("sigma", sigma)?;
    let beta = 0.5 * (1.0 / (4.0 * g * d)).min(s / (g * g));
    positive("beta", beta)
}

/// OGD step `η_t = D / (G √t)`.
pub fn gradient_step(diameter: f64, grad_bound: f64, t: u64) -> f64 {
    diameter / (grad_bound * (t as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identities_hold(s: &Schedule) {
        let d = s.dim as f64;
        assert_eq!(s.alpha, s.sigma * s.delta * s.delta / (d * d * s.loss_bound * s.loss_bound));
        assert_eq!(s.beta, 0.5 * (s.delta / (4.0 * d * s.loss_bound * s.diameter)).min(s.alpha));
        assert_eq!(s.epsilon, 1.0 / (s.beta * s.beta * s.diameter * s.diameter));
        assert!(s.delta / s.inner_radius <= s.gamma && s.gamma < 1.0);
    }

    #[test]
    fn bounded_schedule_large_horizon_is_unclamped() {
        let s = Schedule::for_bounded_losses(2, 1.0, 2.0, 1.0, 1.0, 1_000_000).unwrap();
        assert!(!s.clamped);
        identities_hold(&s);
        // γ² / 3 = δ / r for this closed form.
        assert!((s.delta - s.gamma * s.gamma / 3.0).abs() < 1e-15);
    }

    #[test]
    fn small_horizon_clamps() {
        let s = Schedule::for_bounded_losses(5, 1.0, 10.0, 1.0, 1.0, 100).unwrap();
        assert!(s.clamped);
        assert_eq!(s.gamma, GAMMA_MAX);
        assert!(s.delta <= s.gamma * s.inner_radius);
        identities_hold(&s);
    }

    #[test]
    fn horizon_below_two_is_rejected() {
        assert!(Schedule::for_bounded_losses(2, 1.0, 2.0, 1.0, 1.0, 1).is_err());
        assert!(Schedule::for_lipschitz_losses(2, 1.0, 2.0, 1.0, 1.0, 1, 1.0).is_err());
    }

    #[test]
    fn lipschitz_schedule_small_case() {
        let s = Schedule::for_lipschitz_losses(1, 1.0, 1.0, 1.0, 1.0, 100, 1.0).unwrap();
        let expected = 0.1 * (10.0 * 100f64.ln() / 6.0).sqrt();
        assert!((s.delta - expected).abs() <= 1e-15 * expected);
        assert_eq!(s.gamma, s.delta / s.inner_radius);
        identities_hold(&s);
    }

    #[test]
    fn lipschitz_delta_scales_with_horizon() {
        let a = Schedule::for_lipschitz_losses(3, 2.0, 4.0, 1.0, 1.5, 10_000, 1.0).unwrap();
        let b = Schedule::for_lipschitz_losses(3, 2.0, 4.0, 1.0, 1.5, 40_000, 1.0).unwrap();
        let predicted = 0.5 * (40_000f64.ln() / 10_000f64.ln()).sqrt();
        assert!((b.delta / a.delta - predicted).abs() < 1e-12);
    }

    #[test]
    fn beta_override_rederives_epsilon() {
        let s = Schedule::for_bounded_losses(2, 1.0, 2.0, 1.0, 1.0, 10_000)
            .unwrap()
            .with_overrides(&ScheduleOverrides {
                beta: Some(1e-3),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(s.beta, 1e-3);
        assert_eq!(s.epsilon, 1.0 / (1e-6 * 4.0));
    }

    #[test]
    fn infeasible_delta_override_is_rejected() {
        let s = Schedule::for_bounded_losses(2, 1.0, 2.0, 1.0, 1.0, 10_000).unwrap();
        let err = s.with_overrides(&ScheduleOverrides {
            delta: Some(0.9),
            gamma: Some(0.5),
            beta: None,
        });
        assert!(err.is_err());
    }

    #[test]
    fn underflowing_beta_fails_fast() {
        let err = Schedule::for_bounded_losses(2, 1.0, 2.0, 1e-320, 1.0, 10_000);
        assert!(matches!(err, Err(LearnerError::Config(_))));
    }

    #[test]
    fn step_rules() {
        let s = Schedule::for_bounded_losses(2, 1.0, 2.0, 1.0, 1.0, 10_000).unwrap();
        assert_eq!(s.bandit_gradient_step(1), 2.0);
        assert_eq!(gradient_step(1.0, 2.0, 4), 0.25);
    }
}
