//! Loss families used by the experiments, their gradients, and closed-form
//! bounds on `|f|`, `‖∇f‖` and the Lipschitz constant over a feasible set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FeasibleSet, Point};

#[derive(Debug, Clone, Error)]
pub enum LossError {
    #[error("dimension mismatch: point has {point}, sample has {sample}")]
    DimensionMismatch { point: usize, sample: usize },
    #[error("classification label must be -1 or +1, got {0}")]
    InvalidLabel(f64),
    #[error("sample has non-finite entries")]
    NonFinite,
    #[error("cannot bound losses over an empty dataset")]
    EmptyDataset,
    #[error("loss bounds are degenerate (F = {loss_bound}, G = {grad_bound}); all samples are zero?")]
    DegenerateBounds { loss_bound: f64, grad_bound: f64 },
}

/// One observation: a feature (or return) vector and a label.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSample {
    pub z: Point,
    pub label: f64,
}

impl LossSample {
    pub fn new(z: Point, label: f64) -> Self {
        Self { z, label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossFamily {
    /// `½(⟨x,z⟩ − y)²`
    Squared,
    /// `log(1 + exp(−y⟨x,z⟩))`
    Logistic,
    /// `−⟨x,z⟩`: a portfolio return turned into a loss.
    Return,
    /// `½‖x − z‖²`
    Quadratic,
}

impl fmt::Display for LossFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossFamily::Squared => "squared",
            LossFamily::Logistic => "logistic",
            LossFamily::Return => "return",
            LossFamily::Quadratic => "quadratic",
        })
    }
}

impl FromStr for LossFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "squared" => Ok(LossFamily::Squared),
            "logistic" => Ok(LossFamily::Logistic),
            "return" => Ok(LossFamily::Return),
            "quadratic" => Ok(LossFamily::Quadratic),
            other => Err(format!("unknown loss family '{other}'")),
        }
    }
}

fn check_dims(x: &Point, s: &LossSample) -> Result<(), LossError> {
    if x.len() != s.z.len() {
        return Err(LossError::DimensionMismatch {
            point: x.len(),
            sample: s.z.len(),
        });
    }
    Ok(())
}

fn check_label(label: f64) -> Result<(), LossError> {
    if label == 1.0 || label == -1.0 {
        Ok(())
    } else {
        Err(LossError::InvalidLabel(label))
    }
}

/// `log(1 + eᵗ)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `1 / (1 + e⁻ᵗ)` without overflow.
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub fn squared_loss(x: &Point, s: &LossSample) -> Result<f64, LossError> {
    check_dims(x, s)?;
    let r = x.dot(&s.z) - s.label;
    Ok(0.5 * r * r)
}

pub fn squared_grad(x: &Point, s: &LossSample) -> Result<Point, LossError> {
    check_dims(x, s)?;
    Ok(&s.z * (x.dot(&s.z) - s.label))
}

pub fn logistic_loss(x: &Point, s: &LossSample) -> Result<f64, LossError> {
    check_dims(x, s)?;
    check_label(s.label)?;
    Ok(softplus(-s.label * x.dot(&s.z)))
}

pub fn logistic_grad(x: &Point, s: &LossSample) -> Result<Point, LossError> {
    check_dims(x, s)?;
    check_label(s.label)?;
    let margin = s.label * x.dot(&s.z);
    Ok(&s.z * (-s.label * sigmoid(-margin)))
}

/// `P(ŷ = 1 | z) = 1 / (1 + exp(−⟨x,z⟩))`.
pub fn logistic_predict(x: &Point, z: &Point) -> f64 {
    sigmoid(x.dot(z))
}

/// The reported portfolio return `⟨x,z⟩`.
pub fn portfolio_return(x: &Point, s: &LossSample) -> Result<f64, LossError> {
    check_dims(x, s)?;
    Ok(x.dot(&s.z))
}

/// The loss fed to learners: `−⟨x,z⟩`.
pub fn return_loss(x: &Point, s: &LossSample) -> Result<f64, LossError> {
    portfolio_return(x, s).map(|r| -r)
}

pub fn return_grad(x: &Point, s: &LossSample) -> Result<Point, LossError> {
    check_dims(x, s)?;
    Ok(-&s.z)
}

pub fn quadratic_loss(x: &Point, s: &LossSample) -> Result<f64, LossError> {
    check_dims(x, s)?;
    Ok(0.5 * (x - &s.z).norm_squared())
}

pub fn quadratic_grad(x: &Point, s: &LossSample) -> Result<Point, LossError> {
    check_dims(x, s)?;
    Ok(x - &s.z)
}

impl LossFamily {
    pub fn value(self, x: &Point, s: &LossSample) -> Result<f64, LossError> {
        match self {
            LossFamily::Squared => squared_loss(x, s),
            LossFamily::Logistic => logistic_loss(x, s),
            LossFamily::Return => return_loss(x, s),
            LossFamily::Quadratic => quadratic_loss(x, s),
        }
    }

    pub fn gradient(self, x: &Point, s: &LossSample) -> Result<Point, LossError> {
        match self {
            LossFamily::Squared => squared_grad(x, s),
            LossFamily::Logistic => logistic_grad(x, s),
            LossFamily::Return => return_grad(x, s),
            LossFamily::Quadratic => quadratic_grad(x, s),
        }
    }

    /// Rejects samples the family cannot evaluate.
    pub fn validate(self, s: &LossSample) -> Result<(), LossError> {
        if s.z.iter().any(|c| !c.is_finite()) || !s.label.is_finite() {
            return Err(LossError::NonFinite);
        }
        if self == LossFamily::Logistic {
            check_label(s.label)?;
        }
        Ok(())
    }
}

/// Bounds `F ≥ |f|`, `G ≥ ‖∇f‖` and the Lipschitz constant `L` on `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBounds {
    pub loss_bound: f64,
    pub grad_bound: f64,
    pub lipschitz: f64,
}

/// Closed-form suprema over `set` and every sample.
///
/// With `m = sup_{x∈P} |⟨x,z⟩|` and `R = sup_{x∈P} ‖x‖`:
/// squared `F = ½(m + |y|)²`, `G = (m + |y|)‖z‖`; logistic
/// `F = log(1 + eᵐ)`, `G = ‖z‖`; return `F = m`, `G = ‖z‖`; quadratic
/// `F = ½(R + ‖z‖)²`, `G = R + ‖z‖`. In every case `L = G`.
pub fn estimate_bounds(family: LossFamily, samples: &[LossSample], set: &FeasibleSet) -> Result<LossBounds, LossError> {
    if samples.is_empty() {
        return Err(LossError::EmptyDataset);
    }
    let mut loss_bound: f64 = 0.0;
    let mut grad_bound: f64 = 0.0;
    for s in samples {
        family.validate(s)?;
        if s.z.len() != set.dim() {
            return Err(LossError::DimensionMismatch {
                point: set.dim(),
                sample: s.z.len(),
            });
        }
        let m = set.max_abs_inner(&s.z);
        let zn = s.z.norm();
        let (f, g) = match family {
            LossFamily::Squared => {
                let reach = m + s.label.abs();
                (0.5 * reach * reach, reach * zn)
            }
            LossFamily::Logistic => (softplus(m), zn),
            LossFamily::Return => (m, zn),
            LossFamily::Quadratic => {
                let reach = set.max_norm() + zn;
                (0.5 * reach * reach, reach)
            }
        };
        loss_bound = loss_bound.max(f);
        grad_bound = grad_bound.max(g);
    }
    if !(loss_bound > 0.0 && grad_bound > 0.0 && loss_bound.is_finite() && grad_bound.is_finite()) {
        return Err(LossError::DegenerateBounds { loss_bound, grad_bound });
    }
    Ok(LossBounds {
        loss_bound,
        grad_bound,
        lipschitz: grad_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(v: &[f64]) -> Point {
        Point::from_column_slice(v)
    }

    fn finite_difference(family: LossFamily, x: &Point, s: &LossSample) -> Point {
        let h = 1e-5;
        Point::from_fn(x.len(), |i, _| {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            (family.value(&up, s).unwrap() - family.value(&down, s).unwrap()) / (2.0 * h)
        })
    }

    fn random_point(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Point {
        Point::from_fn(d, |_, _| rng.gen_range(-scale..scale))
    }

    #[test]
    fn squared_examples() {
        let s = LossSample::new(pt(&[1.0, 0.0]), 1.0);
        assert_eq!(squared_loss(&pt(&[1.0, 0.0]), &s).unwrap(), 0.0);
        assert_eq!(squared_grad(&pt(&[1.0, 0.0]), &s).unwrap(), pt(&[0.0, 0.0]));
        let s = LossSample::new(pt(&[1.0, 1.0]), 2.0);
        assert_eq!(squared_loss(&pt(&[0.0, 0.0]), &s).unwrap(), 2.0);
        assert_eq!(squared_grad(&pt(&[0.0, 0.0]), &s).unwrap(), pt(&[-2.0, -2.0]));
        assert!(squared_loss(&pt(&[0.0]), &s).is_err());
    }

    #[test]
    fn logistic_examples() {
        let s = LossSample::new(pt(&[1.0, -1.0]), 1.0);
        let x = pt(&[0.5, 0.5]);
        assert!((logistic_loss(&x, &s).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(logistic_predict(&x, &s.z), 0.5);
        let s = LossSample::new(pt(&[50.0]), 1.0);
        let v = logistic_loss(&pt(&[1.0]), &s).unwrap();
        assert!(v > 0.0 && v <= 1e-20);
        let s = LossSample::new(pt(&[700.0]), -1.0);
        let v = logistic_loss(&pt(&[1.0]), &s).unwrap();
        assert!((v - 700.0).abs() < 1e-9);
        assert!(logistic_grad(&pt(&[1.0]), &s).unwrap()[0].is_finite());
        assert!(matches!(
            logistic_loss(&pt(&[1.0]), &LossSample::new(pt(&[1.0]), 0.0)),
            Err(LossError::InvalidLabel(_))
        ));
    }

    #[test]
    fn return_examples() {
        let d = 4;
        let x = Point::from_element(d, 0.25);
        let s = LossSample::new(Point::from_element(d, 0.03), 0.0);
        assert!((portfolio_return(&x, &s).unwrap() - 0.03).abs() < 1e-15);
        let e2 = pt(&[0.0, 0.0, 1.0, 0.0]);
        let s = LossSample::new(pt(&[0.1, -0.2, 0.3, 0.4]), 0.0);
        assert_eq!(portfolio_return(&e2, &s).unwrap(), 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x = random_point(&mut rng, d, 1.0);
            let s = LossSample::new(random_point(&mut rng, d, 0.1), 0.0);
            assert_eq!(return_loss(&x, &s).unwrap() + portfolio_return(&x, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for family in [LossFamily::Squared, LossFamily::Logistic, LossFamily::Return, LossFamily::Quadratic] {
            for _ in 0..100 {
                let x = random_point(&mut rng, 4, 1.0);
                let label = if family == LossFamily::Logistic {
                    if rng.gen::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    rng.gen_range(-2.0..2.0)
                };
                let s = LossSample::new(random_point(&mut rng, 4, 1.0), label);
                let exact = family.gradient(&x, &s).unwrap();
                let approx = finite_difference(family, &x, &s);
                assert!((exact - approx).amax() <= 1e-6, "{family}");
            }
        }
    }

    #[test]
    fn losses_are_convex_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for family in [LossFamily::Squared, LossFamily::Logistic, LossFamily::Return, LossFamily::Quadratic] {
            for _ in 0..200 {
                let a = random_point(&mut rng, 3, 2.0);
                let b = random_point(&mut rng, 3, 2.0);
                let lam: f64 = rng.gen();
                let s = LossSample::new(random_point(&mut rng, 3, 1.0), if rng.gen::<bool>() { 1.0 } else { -1.0 });
                let mid = &a * lam + &b * (1.0 - lam);
                let lhs = family.value(&mid, &s).unwrap();
                let rhs = lam * family.value(&a, &s).unwrap() + (1.0 - lam) * family.value(&b, &s).unwrap();
                assert!(lhs <= rhs + 1e-12, "{family}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn squared_bound_single_sample() {
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        let b = estimate_bounds(LossFamily::Squared, &[LossSample::new(pt(&[1.0, 0.0]), 0.0)], &set).unwrap();
        assert_eq!(b.loss_bound, 0.5);
        assert_eq!(b.grad_bound, 1.0);
    }

    #[test]
    fn bounds_dominate_random_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let ball = FeasibleSet::ball(3, 4.0, 1.0).unwrap();
        let simplex = FeasibleSet::simplex(3).unwrap();
        let samples: Vec<LossSample> = (0..20)
            .map(|_| LossSample::new(random_point(&mut rng, 3, 1.5), if rng.gen::<bool>() { 1.0 } else { -1.0 }))
            .collect();
        for set in [&ball, &simplex] {
            for family in [LossFamily::Squared, LossFamily::Logistic, LossFamily::Return, LossFamily::Quadratic] {
                let b = estimate_bounds(family, &samples, set).unwrap();
                for _ in 0..10_000 {
                    let x = match set {
                        FeasibleSet::Ball(ball) => {
                            let v = crate::geometry::sample_unit_ball(3, &mut rng).unwrap();
                            v * ball.radius()
                        }
                        FeasibleSet::Simplex(_) => {
                            let w = Point::from_fn(3, |_, _| -rng.gen::<f64>().ln());
                            let total = w.sum();
                            w / total
                        }
                    };
                    let s = &samples[rng.gen_range(0..samples.len())];
                    assert!(family.value(&x, s).unwrap().abs() <= b.loss_bound);
                    assert!(family.gradient(&x, s).unwrap().norm() <= b.grad_bound);
                }
            }
        }
    }

    #[test]
    fn return_gradient_bound_is_homogeneous() {
        let set = FeasibleSet::simplex(3).unwrap();
        let samples = vec![LossSample::new(pt(&[0.1, -0.3, 0.2]), 0.0)];
        let doubled = vec![LossSample::new(pt(&[0.2, -0.6, 0.4]), 0.0)];
        let a = estimate_bounds(LossFamily::Return, &samples, &set).unwrap();
        let b = estimate_bounds(LossFamily::Return, &doubled, &set).unwrap();
        assert_eq!(b.grad_bound, 2.0 * a.grad_bound);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        assert!(matches!(
            estimate_bounds(LossFamily::Squared, &[], &set),
            Err(LossError::EmptyDataset)
        ));
    }
}
