//! Deterministic synthetic grids for demos, tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use slidecorr_core::{Grid, Result};

use crate::args::Pattern;

/// Value planted for missing samples.
pub const MISSING: f64 = -9999.0;

/// Standard deviation of the noise added to `-x` in the anticorrelated pair.
const ANTICORR_NOISE: f64 = 0.05;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(shape: &[usize], rng: &mut impl Rng) -> Result<Grid<f64>> {
    Grid::from_fn(shape.to_vec(), |_| rng.random::<f64>())
}

/// Generates one grid, or a pair for patterns that define one.
///
/// `pair` requests a second grid for `random` (independent noise); the
/// `anticorr` and `clouds` patterns always produce a pair.
pub fn generate(
    shape: &[usize],
    pattern: Pattern,
    seed: u64,
    pair: bool,
) -> Result<(Grid<f64>, Option<Grid<f64>>)> {
    let mut rng = rng(seed);
    match pattern {
        Pattern::Ramp => Ok((Grid::from_fn(shape.to_vec(), |i| i as f64)?, None)),
        Pattern::Random => {
            let x = uniform(shape, &mut rng)?;
            let y = if pair {
                Some(uniform(shape, &mut rng)?)
            } else {
                None
            };
            Ok((x, y))
        }
        Pattern::Anticorr => {
            let x = uniform(shape, &mut rng)?;
            let noise = Normal::new(0.0, ANTICORR_NOISE).expect("valid sigma");
            let y = x.map(|&v| -v + noise.sample(&mut rng));
            Ok((x, Some(y)))
        }
        Pattern::Clouds => {
            let (x, y) = clouds(shape, &mut rng)?;
            Ok((x, Some(y)))
        }
    }
}

/// A visible/infrared-like pair. Clouds are Gaussian blobs: bright in the
/// visible channel, cold in the infrared one, so windows under cloud edges
/// are strongly anticorrelated while clear-sky windows are not.
fn clouds(shape: &[usize], rng: &mut ChaCha8Rng) -> Result<(Grid<f64>, Grid<f64>)> {
    let total: usize = shape.iter().product();
    let span = shape.iter().copied().max().unwrap_or(1) as f64;
    let blobs = (total / 256).clamp(1, 64);
    let centers: Vec<(Vec<f64>, f64)> = (0..blobs)
        .map(|_| {
            let c = shape
                .iter()
                .map(|&e| rng.random::<f64>() * e as f64)
                .collect();
            let radius = span * (0.05 + 0.15 * rng.random::<f64>());
            (c, radius)
        })
        .collect();
    let noise = Normal::new(0.0, 0.02).expect("valid sigma");

    let mut idx = vec![0usize; shape.len()];
    let mut cover = Vec::with_capacity(total);
    for _ in 0..total {
        let c: f64 = centers
            .iter()
            .map(|(center, radius)| {
                let d2: f64 = idx
                    .iter()
                    .zip(center)
                    .map(|(&i, &c)| (i as f64 - c).powi(2))
                    .sum();
                (-d2 / (2.0 * radius * radius)).exp()
            })
            .sum::<f64>()
            .min(1.0);
        cover.push(c);
        for d in (0..shape.len()).rev() {
            idx[d] += 1;
            if idx[d] < shape[d] {
                break;
            }
            idx[d] = 0;
        }
    }

    let visible: Vec<f64> = cover
        .iter()
        .map(|&c| 0.05 + 0.1 * rng.random::<f64>() + 0.8 * c + noise.sample(rng))
        .collect();
    let infrared: Vec<f64> = cover
        .iter()
        .map(|&c| 285.0 + 2.0 * rng.random::<f64>() - 40.0 * c + 10.0 * noise.sample(rng))
        .collect();
    Ok((
        Grid::new(shape.to_vec(), visible)?,
        Grid::new(shape.to_vec(), infrared)?,
    ))
}

/// Replaces roughly `fraction` of the samples with [`MISSING`].
pub fn plant_missing(g: &mut Grid<f64>, fraction: f64, rng: &mut impl Rng) {
    if fraction <= 0.0 {
        return;
    }
    for v in g.as_mut_slice() {
        if rng.random::<f64>() < fraction {
            *v = MISSING;
        }
    }
}
