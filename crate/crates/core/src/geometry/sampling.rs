use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::{GeometryError, Point};

fn gaussian(d: usize, rng: &mut dyn RngCore) -> Point {
    Point::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Uniform draw from the unit sphere `S^{d-1}` by normalising `d`
/// independent standard normals.
pub fn sample_unit_sphere(d: usize, rng: &mut dyn RngCore) -> Result<Point, GeometryError> {
    if d == 0 {
        return Err(GeometryError::InvalidDimension(d));
    }
    loop {
        let g = gaussian(d, rng);
        let norm = g.norm();
        if norm > 0.0 && norm.is_finite() {
            return Ok(g / norm);
        }
    }
}

/// Uniform draw from the solid unit ball: a sphere sample scaled by `U^{1/d}`.
pub fn sample_unit_ball(d: usize, rng: &mut dyn RngCore) -> Result<Point, GeometryError> {
    let v = sample_unit_sphere(d, rng)?;
    let u: f64 = rng.gen();
    Ok(v * u.powf(1.0 / d as f64))
}

/// Uniform unit vector orthogonal to the all-ones vector, i.e. a direction
/// that keeps `Σx` unchanged.
pub fn sample_tangent_sphere(d: usize, rng: &mut dyn RngCore) -> Result<Point, GeometryError> {
    if d < 2 {
        return Err(GeometryError::InvalidDimension(d));
    }
    loop {
        let mut g = gaussian(d, rng);
        let mean = g.mean();
        g.add_scalar_mut(-mean);
        let norm = g.norm();
        if norm > 0.0 && norm.is_finite() {
            return Ok(g / norm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_dimension_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_unit_sphere(0, &mut rng).is_err());
        assert!(sample_unit_ball(0, &mut rng).is_err());
        assert!(sample_tangent_sphere(1, &mut rng).is_err());
    }

    #[test]
    fn one_dimensional_sphere_is_two_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut plus = 0;
        let n = 20_000;
        for _ in 0..n {
            let v = sample_unit_sphere(1, &mut rng).unwrap();
            assert!(v[0] == 1.0 || v[0] == -1.0);
            if v[0] > 0.0 {
                plus += 1;
            }
        }
        // Binomial(n, 1/2): 4 standard deviations.
        let sd = (n as f64 * 0.25).sqrt();
        assert!((plus as f64 - n as f64 / 2.0).abs() < 4.0 * sd);
    }

    #[test]
    fn sphere_sample_has_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let v = sample_unit_sphere(5, &mut rng).unwrap();
        assert!((v.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sphere_mean_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut mean = Point::zeros(3);
        for _ in 0..n {
            mean += sample_unit_sphere(3, &mut rng).unwrap();
        }
        mean /= n as f64;
        assert!(mean.norm() <= 0.02, "mean norm {}", mean.norm());
    }

    #[test]
    fn interval_ball_mean_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| sample_unit_ball(1, &mut rng).unwrap()[0]).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 0.02);
    }

    #[test]
    fn disc_area_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let mut inside = 0usize;
        for _ in 0..n {
            let u = sample_unit_ball(2, &mut rng).unwrap();
            assert!(u.norm() <= 1.0);
            if u.norm() <= 0.5 {
                inside += 1;
            }
        }
        let frac = inside as f64 / n as f64;
        assert!((frac - 0.25).abs() <= 0.01, "fraction {frac}");
    }

    #[test]
    fn tangent_direction_preserves_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 2..10 {
            let v = sample_tangent_sphere(d, &mut rng).unwrap();
            assert!(v.sum().abs() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }
}
