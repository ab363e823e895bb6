use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use super::sets::scale_into_ball;
use super::{check_point, BallSet, FeasibleSet, GeometryError, Point, SimplexSet};

/// Objective tolerance of the inner solver, relative to `max(1, h₀)` where
/// `h₀` is the objective at the Euclidean projection of the target.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-8;

/// Iteration cap of the inner solver.
pub const MAX_INNER_ITERATIONS: usize = 10_000;

/// Closest point of `P` (or `(1-γ)P` when `use_shrunken`) to `x` in the
/// Euclidean norm.
pub fn euclidean_project(set: &FeasibleSet, x: &Point, use_shrunken: bool) -> Result<Point, GeometryError> {
    check_point(x, set.dim())?;
    Ok(match set {
        FeasibleSet::Ball(b) => {
            let radius = if use_shrunken { b.shrunken_radius() } else { b.radius() };
            scale_into_ball(x.clone(), radius)
        }
        FeasibleSet::Simplex(s) => {
            let floor = if use_shrunken { s.shrunken_lower_bound() } else { 0.0 };
            let mass = if use_shrunken { 1.0 - s.shrink() } else { 1.0 };
            project_floored_simplex(x, floor, mass)
        }
    })
}

/// `argmin_{x ∈ (1-γ)P} ‖y − x‖_A` for a positive definite `A`.
///
/// Feasible targets are returned unchanged. The ball case solves the KKT
/// system `x(λ) = (A + λI)⁻¹ A y` by bisection on the multiplier in the
/// eigenbasis of `A`; the simplex case runs accelerated projected gradient
/// and stops on the Frank–Wolfe duality gap.
pub fn generalized_project(set: &FeasibleSet, a: &DMatrix<f64>, y: &Point) -> Result<Point, GeometryError> {
    check_point(y, set.dim())?;
    if a.nrows() != set.dim() || a.ncols() != set.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: set.dim(),
            found: a.nrows(),
        });
    }
    if set.contains_shrunken(y) {
        return Ok(y.clone());
    }
    match set {
        FeasibleSet::Ball(b) => project_ball_in_norm(b, a, y),
        FeasibleSet::Simplex(s) => project_simplex_in_norm(s, a, y),
    }
}

fn project_ball_in_norm(ball: &BallSet, a: &DMatrix<f64>, y: &Point) -> Result<Point, GeometryError> {
    let radius = ball.shrunken_radius();
    let eig = SymmetricEigen::new(a.clone());
    let mu = &eig.eigenvalues;
    let min_eigenvalue = mu.min();
    if !(min_eigenvalue > 0.0) {
        return Err(GeometryError::NotPositiveDefinite { min_eigenvalue });
    }
    let q = &eig.eigenvectors;
    let w = q.transpose() * y;
    let sq_norm_at = |lambda: f64| -> f64 {
        mu.iter()
            .zip(w.iter())
            .map(|(&m, &wi)| {
                let c = m * wi / (m + lambda);
                c * c
            })
            .sum()
    };

    let target = radius * radius;
    let mut lo = 0.0;
    let mut hi = mu.max() * y.norm() / radius;
    while sq_norm_at(hi) > target {
        hi *= 2.0;
    }
    let mut iterations = 0;
    while iterations < MAX_INNER_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sq_norm_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let coeffs = Point::from_fn(w.len(), |i, _| mu[i] * w[i] / (mu[i] + hi));
    let x = scale_into_ball(q * coeffs, radius);
    if iterations >= MAX_INNER_ITERATIONS {
        return Err(GeometryError::NotConverged {
            residual: (hi - lo) / hi.max(f64::MIN_POSITIVE),
            best: x,
            iterations,
        });
    }
    Ok(x)
}

fn project_simplex_in_norm(simplex: &SimplexSet, a: &DMatrix<f64>, y: &Point) -> Result<Point, GeometryError> {
    if Cholesky::new(a.clone()).is_none() {
        return Err(GeometryError::NotPositiveDefinite {
            min_eigenvalue: SymmetricEigen::new(a.clone()).eigenvalues.min(),
        });
    }
    let floor = simplex.shrunken_lower_bound();
    let mass = 1.0 - simplex.shrink();
    let project = |p: &Point| project_floored_simplex(p, floor, mass);

    // Gradient of h(x) = (x−y)ᵀA(x−y) is 2A(x−y); its Lipschitz constant is
    // 2λ_max(A), bounded above by Gershgorin and by the trace.
    let gershgorin = a.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let lipschitz = 2.0 * gershgorin.min(a.trace());
    let step = 1.0 / lipschitz;

    let grad_at = |x: &Point| -> Point { (a * (x - y)) * 2.0 };
    let objective = |x: &Point, grad: &Point| -> f64 { 0.5 * (x - y).dot(grad) };
    // ⟨∇, x − s⟩ maximised over the vertices s = floor·𝟙 + mass·e_k.
    let fw_gap = |x: &Point, grad: &Point| -> f64 { grad.dot(x) - floor * grad.sum() - mass * grad.min() };

    let mut x = project(y);
    let mut grad_x = grad_at(&x);
    let mut h_x = objective(&x, &grad_x);
    let tolerance = OBJECTIVE_TOLERANCE * h_x.max(1.0);
    let mut x_prev = x.clone();
    let mut momentum = 1.0_f64;
    let mut gap = fw_gap(&x, &grad_x);

    for _ in 0..MAX_INNER_ITERATIONS {
        if gap <= tolerance {
            return Ok(x);
        }
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let look_ahead = &x + (&x - &x_prev) * ((momentum - 1.0) / next_momentum);
        let mut candidate = project(&(&look_ahead - grad_at(&look_ahead) * step));
        let mut grad_c = grad_at(&candidate);
        let mut h_c = objective(&candidate, &grad_c);
        if h_c > h_x {
            // Momentum overshot: restart from a plain projected step.
            momentum = 1.0;
            candidate = project(&(&x - &grad_x * step));
            grad_c = grad_at(&candidate);
            h_c = objective(&candidate, &grad_c);
        } else {
            momentum = next_momentum;
        }
        x_prev = std::mem::replace(&mut x, candidate);
        grad_x = grad_c;
        h_x = h_c;
        gap = fw_gap(&x, &grad_x);
    }
    if gap <= tolerance {
        return Ok(x);
    }
    Err(GeometryError::NotConverged {
        best: x,
        residual: gap,
        iterations: MAX_INNER_ITERATIONS,
    })
}

/// Euclidean projection onto `{x : x_i ≥ floor, Σ(x_i − floor) = mass}` by
/// the sort-and-threshold rule.
fn project_floored_simplex(x: &Point, floor: f64, mass: f64) -> Point {
    let shifted: Vec<f64> = x.iter().map(|&c| c - floor).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - mass) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    Point::from_iterator(x.len(), shifted.into_iter().map(|c| floor + (c - theta).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64]) -> Point {
        Point::from_column_slice(v)
    }

    #[test]
    fn interior_point_is_fixed() {
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        let x = pt(&[0.3, 0.4]);
        assert_eq!(euclidean_project(&set, &x, false).unwrap(), x);
    }

    #[test]
    fn exterior_point_scales_radially() {
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        let p = euclidean_project(&set, &pt(&[3.0, 4.0]), false).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn simplex_projection_of_uniform_excess() {
        let set = FeasibleSet::simplex(3).unwrap();
        let p = euclidean_project(&set, &pt(&[0.5, 0.5, 0.5]), false).unwrap();
        for c in p.iter() {
            assert!((c - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn simplex_projection_clips_negative_mass() {
        let set = FeasibleSet::simplex(3).unwrap();
        let p = euclidean_project(&set, &pt(&[2.0, 0.0, -1.0]), false).unwrap();
        assert_eq!(p, pt(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn shrunken_simplex_projection_respects_floor() {
        let set = FeasibleSet::simplex(4).unwrap().with_shrink(0.2).unwrap();
        let p = euclidean_project(&set, &pt(&[5.0, 0.0, 0.0, 0.0]), true).unwrap();
        assert!(set.contains_shrunken(&p));
        assert!((p[1] - 0.05).abs() < 1e-15);
        assert!((p[0] - 0.85).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        assert!(euclidean_project(&set, &pt(&[1.0]), false).is_err());
        assert!(generalized_project(&set, &DMatrix::identity(2, 2), &pt(&[1.0, 2.0, 3.0])).is_err());
        assert!(generalized_project(&set, &DMatrix::identity(3, 3), &pt(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn non_positive_definite_is_rejected() {
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            generalized_project(&set, &a, &pt(&[2.0, 0.0])),
            Err(GeometryError::NotPositiveDefinite { .. })
        ));
        let simplex = FeasibleSet::simplex(2).unwrap();
        assert!(matches!(
            generalized_project(&simplex, &a, &pt(&[2.0, 0.0])),
            Err(GeometryError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn identity_metric_matches_euclidean_on_ball() {
        let set = FeasibleSet::ball(3, 4.0, 1.0).unwrap().with_shrink(0.25).unwrap();
        let y = pt(&[3.0, -1.0, 2.0]);
        let g = generalized_project(&set, &DMatrix::identity(3, 3), &y).unwrap();
        let e = euclidean_project(&set, &y, true).unwrap();
        assert!((g - e).amax() < 1e-10);
    }

    #[test]
    fn diagonal_metric_on_unit_circle() {
        // Brute force over the boundary: the optimum is on the circle since
        // the target is outside.
        let set = FeasibleSet::ball(2, 2.0, 1.0).unwrap();
        let a = DMatrix::from_diagonal(&pt(&[4.0, 1.0]));
        let y = pt(&[2.0, 0.0]);
        let x = generalized_project(&set, &a, &y).unwrap();
        let obj = |p: &Point| {
            let d = y.clone() - p;
            (d.transpose() * &a * &d)[(0, 0)]
        };
        let n = 1_000_000;
        let best = (0..n)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / n as f64;
                obj(&pt(&[th.cos(), th.sin()]))
            })
            .fold(f64::INFINITY, f64::min);
        assert!((x.norm() - 1.0).abs() < 1e-12);
        assert!(obj(&x) <= best + 1e-3);
        assert!((obj(&x) - best).abs() <= 1e-3);
    }

    #[test]
    fn simplex_identity_metric_matches_euclidean() {
        let set = FeasibleSet::simplex(5).unwrap().with_shrink(0.1).unwrap();
        let y = pt(&[0.9, -0.3, 0.4, 0.2, 0.1]);
        let g = generalized_project(&set, &DMatrix::identity(5, 5), &y).unwrap();
        let e = euclidean_project(&set, &y, true).unwrap();
        assert!((&g - &e).amax() < 1e-6);
        assert!(set.contains_shrunken(&g));
    }
}
