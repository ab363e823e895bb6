//! Seeded synthetic streams shaped like the benchmark datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::Dataset;
use crate::geometry::Point;
use crate::losses::LossSample;

/// Sample count and feature width of the abalone regression data.
pub const ABALONE_SHAPE: (usize, usize) = (4177, 7);
/// Periods and asset count of the weekly SSE 180 return table.
pub const SSE180_SHAPE: (usize, usize) = (680, 94);

/// Target of the built-in quadratic stream: a fixed interior point at
/// distance 0.4 from the centre along the diagonal.
pub fn default_quadratic_target(dim: usize) -> Point {
    Point::from_element(dim, 0.4 / (dim as f64).sqrt())
}

/// A stream that repeats one loss `½‖x − target‖²`.
pub fn quadratic_stream(target: Point) -> Dataset {
    Dataset::new(vec![LossSample::new(target, 0.0)]).expect("one sample")
}

/// Linear-model regression data: features in `[0, 1]` sharing a common
/// size factor (as physical measurements do), labels `⟨w, z⟩` plus
/// Gaussian noise of standard deviation `noise`, with `‖w‖ = weight_norm`.
pub fn regression_stream(n: usize, dim: usize, weight_norm: f64, noise: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = raw.iter().map(|w| w * w).sum::<f64>().sqrt();
    let w = Point::from_iterator(dim, raw.iter().map(|v| v * weight_norm / norm));
    let noise = Normal::new(0.0, noise).expect("valid noise");
    let samples = (0..n)
        .map(|_| {
            let size: f64 = rng.gen_range(0.1..0.9);
            let z = Point::from_fn(dim, |_, _| (size + 0.1 * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0));
            let label = w.dot(&z) + noise.sample(&mut rng);
            LossSample::new(z, label)
        })
        .collect();
    Dataset::new(samples).expect("non-empty")
}

/// Labels `sign(⟨w, z⟩)` for Gaussian features, with a fraction `flip` of
/// labels inverted.
pub fn classification_stream(n: usize, dim: usize, flip: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = Point::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let samples = (0..n)
        .map(|_| {
            let z = Point::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let mut label = if w.dot(&z) >= 0.0 { 1.0 } else { -1.0 };
            if rng.gen_bool(flip) {
                label = -label;
            }
            LossSample::new(z, label)
        })
        .collect();
    Dataset::new(samples).expect("non-empty")
}

/// Weekly returns: every asset draws Gaussian returns with mean
/// `base_mean` and standard deviation `volatility`, except asset
/// `dominant`, whose mean is `dominant_mean`. Returns are floored at −0.99.
pub fn returns_stream(n: usize, dim: usize, dominant: usize, base_mean: f64, dominant_mean: f64, volatility: f64, seed: u64) -> Dataset {
    assert!(dominant < dim, "dominant asset index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let z = Point::from_fn(dim, |j, _| {
                let mean = if j == dominant { dominant_mean } else { base_mean };
                (mean + volatility * rng.sample::<f64, _>(StandardNormal)).max(-0.99)
            });
            LossSample::new(z, 0.0)
        })
        .collect();
    Dataset::new(samples).expect("non-empty")
}
