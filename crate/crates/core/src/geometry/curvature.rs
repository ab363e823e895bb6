use nalgebra::{Cholesky, DMatrix};

use super::{check_point, GeometryError, Point};

/// Number of Sherman–Morrison updates between direct re-inversions of `A`.
pub const REFRESH_INTERVAL: u64 = 256;

/// The matrix `A_t = εI + Σ g_s g_sᵀ` together with its inverse, kept in
/// sync by rank-one updates.
#[derive(Debug, Clone)]
pub struct CurvatureState {
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    epsilon: f64,
    update_count: u64,
}

impl CurvatureState {
    /// `A_0 = εI`.
    pub fn new(dim: usize, epsilon: f64) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::InvalidDimension(dim));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "regulariser must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self {
            a: DMatrix::identity(dim, dim) * epsilon,
            a_inv: DMatrix::identity(dim, dim) / epsilon,
            epsilon,
            update_count: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    /// `A ← A + ggᵀ`, with the inverse updated by
    /// `A⁻¹ ← A⁻¹ − A⁻¹ggᵀA⁻¹ / (1 + gᵀA⁻¹g)` in `O(d²)`.
    pub fn rank_one_update(&mut self, g: &Point) -> Result<(), GeometryError> {
        check_point(g, self.dim())?;
        let u = &self.a_inv * g;
        let denom = 1.0 + g.dot(&u);
        if !(denom.is_finite() && denom > 0.0) {
            return Err(GeometryError::DegenerateUpdate(denom));
        }
        self.a.ger(1.0, g, g, 1.0);
        self.a_inv.ger(-1.0 / denom, &u, &u, 1.0);
        self.update_count += 1;
        if self.update_count.is_multiple_of(REFRESH_INTERVAL) {
            self.refresh_inverse()?;
        }
        Ok(())
    }

    /// Recomputes `A⁻¹` from `A` by a Cholesky solve.
    pub fn refresh_inverse(&mut self) -> Result<(), GeometryError> {
        let chol = Cholesky::new(self.a.clone()).ok_or(GeometryError::NotPositiveDefinite { min_eigenvalue: f64::NAN })?;
        let mut inv = chol.inverse();
        // Cholesky inverses are symmetric up to rounding; make it exact.
        for i in 0..inv.nrows() {
            for j in 0..i {
                let m = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = m;
                inv[(j, i)] = m;
            }
        }
        self.a_inv = inv;
        Ok(())
    }

    /// `A⁻¹ g`.
    pub fn apply_inverse(&self, g: &Point) -> Point {
        &self.a_inv * g
    }

    /// `max |A·A⁻¹ − I|`.
    pub fn inverse_residual(&self) -> f64 {
        let mut prod = &self.a * &self.a_inv;
        for i in 0..prod.nrows() {
            prod[(i, i)] -= 1.0;
        }
        prod.amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_update_closed_form() {
        let mut c = CurvatureState::new(2, 1.0).unwrap();
        c.rank_one_update(&Point::from_vec(vec![1.0, 0.0])).unwrap();
        let inv = c.inverse();
        assert!((inv[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((inv[(1, 1)] - 1.0).abs() < 1e-15);
        assert_eq!(inv[(0, 1)], 0.0);
        assert_eq!(c.matrix()[(0, 0)], 2.0);
    }

    #[test]
    fn zero_update_only_counts() {
        let mut c = CurvatureState::new(3, 2.5).unwrap();
        let before = c.clone();
        c.rank_one_update(&Point::zeros(3)).unwrap();
        assert_eq!(c.update_count(), 1);
        assert_eq!(c.matrix(), before.matrix());
        assert_eq!(c.inverse(), before.inverse());
    }

    #[test]
    fn refresh_happens_on_schedule() {
        let mut c = CurvatureState::new(2, 1.0).unwrap();
        for k in 0..REFRESH_INTERVAL {
            let g = Point::from_vec(vec![(k as f64).sin(), (k as f64).cos()]);
            c.rank_one_update(&g).unwrap();
        }
        assert_eq!(c.update_count(), REFRESH_INTERVAL);
        assert!(c.inverse_residual() < 1e-12);
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(CurvatureState::new(2, 0.0).is_err());
        assert!(CurvatureState::new(2, f64::INFINITY).is_err());
        assert!(CurvatureState::new(0, 1.0).is_err());
    }

    #[test]
    fn rejects_wrong_dimension() {
        let mut c = CurvatureState::new(2, 1.0).unwrap();
        assert!(c.rank_one_update(&Point::zeros(3)).is_err());
    }
}
