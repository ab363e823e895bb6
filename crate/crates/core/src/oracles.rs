//! Brute-force references for tests and the acceptance suite.
//!
//! Nothing here shares numerical code with the modules it checks: inversion
//! is plain Gaussian elimination on row vectors, projections are exhaustive
//! grid searches, and the single-step chain uses scalar 2×2 algebra. Every
//! oracle refuses inputs large enough to make brute force impractical.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::geometry::{FeasibleSet, Point};
use crate::learners::Schedule;

#[derive(Debug, Clone, Error)]
pub enum OracleError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("oracle limited to dimension {max}, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("grid resolution must be at least 2")]
    Resolution,
}

/// Largest condition number `direct_inverse` accepts.
pub const MAX_CONDITION: f64 = 1e12;

fn to_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
}

fn one_norm(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    (0..n).map(|j| m.iter().map(|row| row[j].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn direct_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>, OracleError> {
    if a.nrows() != a.ncols() {
        return Err(OracleError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    let original = to_rows(a);
    let mut m = original.clone();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let scale = one_norm(&original);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))
            .expect("non-empty range");
        if m[pivot_row][col].abs() <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
            return Err(OracleError::IllConditioned { condition: f64::INFINITY });
        }
        m.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let p = m[col][col];
        for j in 0..n {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                m[r][j] -= factor * m[col][j];
                inv[r][j] -= factor * inv[col][j];
            }
        }
    }
    let condition = scale * one_norm(&inv);
    if !(condition < MAX_CONDITION) {
        return Err(OracleError::IllConditioned { condition });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| inv[i][j]))
}

/// `f(x) = xᵀQx + bᵀx + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpec {
    pub q: DMatrix<f64>,
    pub b: Point,
    pub c: f64,
}

impl QuadraticSpec {
    pub fn new(q: DMatrix<f64>, b: Point, c: f64) -> Result<Self, OracleError> {
        if q.nrows() != q.ncols() {
            return Err(OracleError::NotSquare {
                rows: q.nrows(),
                cols: q.ncols(),
            });
        }
        if b.len() != q.nrows() {
            return Err(OracleError::DimensionMismatch {
                expected: q.nrows(),
                found: b.len(),
            });
        }
        let n = q.nrows();
        let mut q = q;
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (q[(i, j)] + q[(j, i)]);
                q[(i, j)] = m;
                q[(j, i)] = m;
            }
        }
        Ok(Self { q, b, c })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn value(&self, x: &Point) -> f64 {
        let n = self.dim();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += x[i] * self.q[(i, j)] * x[j];
            }
        }
        quad + (0..n).map(|i| self.b[i] * x[i]).sum::<f64>() + self.c
    }

    /// `2Qx + b`.
    pub fn gradient(&self, x: &Point) -> Point {
        let n = self.dim();
        Point::from_fn(n, |i, _| 2.0 * (0..n).map(|j| self.q[(i, j)] * x[j]).sum::<f64>() + self.b[i])
    }
}

/// Ball-smoothed quadratic in closed form: `f̂(x) = f(x) + δ² tr(Q)/(d+2)`
/// and `∇f̂ = ∇f`, from `E[u] = 0` and `E[uuᵀ] = I/(d+2)` on the unit ball.
pub fn quadratic_smoothed(spec: &QuadraticSpec, x: &Point, delta: f64) -> (f64, Point) {
    let d = spec.dim() as f64;
    let trace: f64 = (0..spec.dim()).map(|i| spec.q[(i, i)]).sum();
    (spec.value(x) + delta * delta * trace / (d + 2.0), spec.gradient(x))
}

fn a_norm_sq(a: &DMatrix<f64>, y: &Point, x: &[f64]) -> f64 {
    let n = x.len();
    let diff: Vec<f64> = (0..n).map(|i| y[i] - x[i]).collect();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += diff[i] * a[(i, j)] * diff[j];
        }
    }
    total
}

/// Exhaustive minimiser of `‖y − x‖_A` over a grid of `(1-γ)P` with
/// `resolution` points per axis. Limited to `d ≤ 3`.
pub fn grid_project_oracle(set: &FeasibleSet, a: &DMatrix<f64>, y: &Point, resolution: usize) -> Result<Point, OracleError> {
    let d = set.dim();
    if d > 3 {
        return Err(OracleError::TooLarge { max: 3, got: d });
    }
    if resolution < 2 {
        return Err(OracleError::Resolution);
    }
    if y.len() != d || a.nrows() != d || a.ncols() != d {
        return Err(OracleError::DimensionMismatch {
            expected: d,
            found: y.len(),
        });
    }
    let mut best = (f64::INFINITY, vec![0.0; d]);
    let mut consider = |x: Vec<f64>| {
        let obj = a_norm_sq(a, y, &x);
        if obj < best.0 {
            best = (obj, x);
        }
    };
    let steps = resolution - 1;
    match set {
        FeasibleSet::Ball(b) => {
            let radius = b.shrunken_radius();
            let coord = |k: usize| -radius + 2.0 * radius * k as f64 / steps as f64;
            let mut idx = vec![0usize; d];
            loop {
                let x: Vec<f64> = idx.iter().map(|&k| coord(k)).collect();
                if x.iter().map(|c| c * c).sum::<f64>().sqrt() <= radius {
                    consider(x);
                }
                let mut axis = 0;
                loop {
                    if axis == d {
                        return Ok(Point::from_vec(best.1));
                    }
                    idx[axis] += 1;
                    if idx[axis] <= steps {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                }
            }
        }
        FeasibleSet::Simplex(s) => {
            let floor = s.shrunken_lower_bound();
            let mass = 1.0 - s.shrink();
            let frac = |k: usize| k as f64 / steps as f64;
            match d {
                2 => {
                    for i in 0..=steps {
                        consider(vec![floor + mass * frac(i), floor + mass * frac(steps - i)]);
                    }
                }
                3 => {
                    for i in 0..=steps {
                        for j in 0..=(steps - i) {
                            let k = steps - i - j;
                            consider(vec![floor + mass * frac(i), floor + mass * frac(j), floor + mass * frac(k)]);
                        }
                    }
                }
                _ => return Err(OracleError::TooLarge { max: 3, got: d }),
            }
            Ok(Point::from_vec(best.1))
        }
    }
}

/// Closed-form eigenpairs of the symmetric matrix `[[p, q], [q, s]]`.
fn eigen_2x2(p: f64, q: f64, s: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let mean = 0.5 * (p + s);
    let radius = (0.25 * (p - s) * (p - s) + q * q).sqrt();
    let values = [mean + radius, mean - radius];
    if q == 0.0 {
        return if p >= s {
            ([p, s], [[1.0, 0.0], [0.0, 1.0]])
        } else {
            ([s, p], [[0.0, 1.0], [1.0, 0.0]])
        };
    }
    let v0 = [q, values[0] - p];
    let n0 = (v0[0] * v0[0] + v0[1] * v0[1]).sqrt();
    let first = [v0[0] / n0, v0[1] / n0];
    (values, [first, [-first[1], first[0]]])
}

/// One ONSEG step from a fresh learner (`A_0 = εI`) on the ball of diameter
/// `D`, evaluated with scalar arithmetic. Limited to `d ≤ 2`.
pub fn single_step_chain(schedule: &Schedule, y: &Point, v: &Point, fval: f64) -> Result<Point, OracleError> {
    let d = y.len();
    if d > 2 || d == 0 {
        return Err(OracleError::TooLarge { max: 2, got: d });
    }
    if v.len() != d {
        return Err(OracleError::DimensionMismatch {
            expected: d,
            found: v.len(),
        });
    }
    let scale = schedule.dim as f64 / schedule.delta * fval;
    let eps = schedule.epsilon;
    let beta = schedule.beta;
    let radius = (1.0 - schedule.gamma) * schedule.diameter / 2.0;

    if d == 1 {
        let g = scale * v[0];
        let a = eps + g * g;
        let z = y[0] - g / (beta * a);
        return Ok(Point::from_vec(vec![z.clamp(-radius, radius)]));
    }

    let (g0, g1) = (scale * v[0], scale * v[1]);
    let (a00, a01, a11) = (eps + g0 * g0, g0 * g1, eps + g1 * g1);
    let det = a00 * a11 - a01 * a01;
    let (i00, i01, i11) = (a11 / det, -a01 / det, a00 / det);
    let z0 = y[0] - (i00 * g0 + i01 * g1) / beta;
    let z1 = y[1] - (i01 * g0 + i11 * g1) / beta;
    if (z0 * z0 + z1 * z1).sqrt() <= radius {
        return Ok(Point::from_vec(vec![z0, z1]));
    }

    // Minimise (z−x)ᵀA(z−x) on ‖x‖ ≤ ρ: x(λ) = (A + λI)⁻¹Az, ‖x(λ)‖ = ρ.
    let (mu, q) = eigen_2x2(a00, a01, a11);
    let w = [q[0][0] * z0 + q[0][1] * z1, q[1][0] * z0 + q[1][1] * z1];
    let coeffs = |lam: f64| [mu[0] * w[0] / (mu[0] + lam), mu[1] * w[1] / (mu[1] + lam)];
    let norm_at = |lam: f64| {
        let c = coeffs(lam);
        (c[0] * c[0] + c[1] * c[1]).sqrt()
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while norm_at(hi) > radius {
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if norm_at(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = coeffs(hi);
    let x = [q[0][0] * c[0] + q[1][0] * c[1], q[0][1] * c[0] + q[1][1] * c[1]];
    Ok(Point::from_vec(x.to_vec()))
}
