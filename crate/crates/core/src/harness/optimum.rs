use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, HarnessError};
use crate::geometry::{euclidean_project, FeasibleSet, Point};
use crate::losses::LossFamily;

/// Iteration budget of the offline solver.
pub const MAX_SOLVER_ITERATIONS: usize = 1_000_000;
/// Relative optimality-gap tolerance of the offline solver.
pub const SOLVER_TOLERANCE: f64 = 1e-8;
/// Random feasible perturbations tried around the returned minimizer.
pub const PERTURBATION_PROBES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub x: Point,
    /// Summed objective over the horizon at `x`.
    pub value: f64,
    /// Certified bound on `value − min`.
    pub gap: f64,
    pub iterations: usize,
}

/// Number of visits each sample receives when `horizon` rounds replay the
/// dataset cyclically in order.
pub fn cyclic_weights(n: usize, horizon: u64) -> Vec<f64> {
    let full = horizon / n as u64;
    let extra = (horizon % n as u64) as usize;
    (0..n).map(|j| (full + u64::from(j < extra)) as f64).collect()
}

struct Objective<'a> {
    data: &'a Dataset,
    family: LossFamily,
    weights: &'a [f64],
}

impl Objective<'_> {
    fn value(&self, x: &Point) -> Result<f64, HarnessError> {
        let mut total = 0.0;
        for (s, &w) in self.data.samples().iter().zip(self.weights) {
            if w != 0.0 {
                total += w * self.family.value(x, s)?;
            }
        }
        Ok(total)
    }

    fn gradient(&self, x: &Point) -> Result<Point, HarnessError> {
        let mut total = Point::zeros(x.len());
        for (s, &w) in self.data.samples().iter().zip(self.weights) {
            if w != 0.0 {
                total.axpy(w, &self.family.gradient(x, s)?, 1.0);
            }
        }
        Ok(total)
    }
}

/// `max_{u∈P} ⟨g, x − u⟩`, an upper bound on the suboptimality of `x` for a
/// convex objective with gradient `g` at `x`.
fn linear_gap(set: &FeasibleSet, g: &Point, x: &Point) -> f64 {
    let min_over_set = match set {
        FeasibleSet::Ball(b) => -b.radius() * g.norm(),
        FeasibleSet::Simplex(_) => g.min(),
    };
    (g.dot(x) - min_over_set).max(0.0)
}

/// Offline minimizer of `Σ_{t≤T} f_t(x)` over the full set, with the stream
/// replayed cyclically in dataset order.
pub fn offline_optimum(data: &Dataset, family: LossFamily, set: &FeasibleSet, horizon: u64) -> Result<Optimum, HarnessError> {
    offline_optimum_weighted(data, family, set, &cyclic_weights(data.len(), horizon))
}

/// Minimizes `Σ_j w_j f_j(x)` over the set by accelerated projected
/// gradient with backtracking and gradient restarts, stopping once the linearized
/// gap falls below the relative tolerance. A final round of random
/// feasible perturbations must not find a better point.
pub fn offline_optimum_weighted(data: &Dataset, family: LossFamily, set: &FeasibleSet, weights: &[f64]) -> Result<Optimum, HarnessError> {
    if weights.len() != data.len() {
        return Err(HarnessError::Config(format!(
            "{} weights for {} samples",
            weights.len(),
            data.len()
        )));
    }
    for s in data.samples() {
        family.validate(s)?;
    }
    let set = set.with_shrink(0.0)?;
    let obj = Objective { data, family, weights };
    let project = |p: &Point| euclidean_project(&set, p, false);
    let mut start = set.center();
    let mut iterations = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);

    for _ in 0..10 {
        let (x, value, gap, used) = accelerated_descent(&obj, &set, &project, start, MAX_SOLVER_ITERATIONS - iterations)?;
        iterations += used;
        let tolerance = SOLVER_TOLERANCE * value.abs().max(1.0);
        if gap > tolerance {
            return Err(HarnessError::NotConverged { iterations, gap });
        }
        match perturbation_check(&obj, &set, &project, &x, value, tolerance, &mut rng)? {
            None => return Ok(Optimum { x, value, gap, iterations }),
            Some(better) => {
                log::warn!("offline solver: perturbation found a better point, restarting");
                start = better;
            }
        }
    }
    Err(HarnessError::NotConverged { iterations, gap: f64::NAN })
}

type Projector<'a> = dyn Fn(&Point) -> Result<Point, crate::geometry::GeometryError> + 'a;

fn accelerated_descent(
    obj: &Objective<'_>,
    set: &FeasibleSet,
    project: &Projector<'_>,
    start: Point,
    budget: usize,
) -> Result<(Point, f64, f64, usize), HarnessError> {
    let mut x = project(&start)?;
    let mut fx = obj.value(&x)?;
    let mut y = x.clone();
    let mut momentum = 1.0_f64;
    let mut lipschitz = 1.0_f64;
    for k in 1..=budget {
        let fy = obj.value(&y)?;
        let gy = obj.gradient(&y)?;
        let next = loop {
            let candidate = project(&(&y - &gy / lipschitz))?;
            let step = &candidate - &y;
            let model = fy + gy.dot(&step) + 0.5 * lipschitz * step.norm_squared();
            let fc = obj.value(&candidate)?;
            if fc <= model + 1e-12 * fy.abs().max(1.0) || lipschitz > 1e300 {
                break (candidate, fc);
            }
            lipschitz *= 2.0;
        };
        let (xn, fxn) = next;
        let gn = obj.gradient(&xn)?;
        let gap = linear_gap(set, &gn, &xn);
        if gap <= SOLVER_TOLERANCE * fxn.abs().max(1.0) {
            return Ok((xn, fxn, gap, k));
        }
        // Gradient restart: drop the momentum once the step turns against
        // the previous move. Unlike comparing objective values, this stays
        // meaningful when the objective has reached its rounding floor.
        if (&y - &xn).dot(&(&xn - &x)) > 0.0 {
            momentum = 1.0;
            y = xn.clone();
        } else {
            let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            y = &xn + (&xn - &x) * ((momentum - 1.0) / next_momentum);
            momentum = next_momentum;
        }
        x = xn;
        fx = fxn;
        lipschitz *= 0.9;
    }
    let g = obj.gradient(&x)?;
    Ok((x.clone(), fx, linear_gap(set, &g, &x), budget))
}

fn perturbation_check(
    obj: &Objective<'_>,
    set: &FeasibleSet,
    project: &Projector<'_>,
    x: &Point,
    value: f64,
    tolerance: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Point>, HarnessError> {
    let scale = set.diameter();
    for _ in 0..PERTURBATION_PROBES {
        let radius = scale * 10f64.powf(-rng.gen_range(0.0..8.0));
        let probe = project(&(x + set.sample_direction(rng) * radius))?;
        if obj.value(&probe)? < value - tolerance {
            return Ok(Some(probe));
        }
    }
    Ok(None)
}
