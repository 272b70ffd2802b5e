//! Seeded inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slidecorr_core::{Grid, Sample};

/// Uniform samples in [0, 1), reproducible from `seed`.
pub fn uniform<T: Sample>(shape: &[usize], seed: u64) -> Grid<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Grid::from_fn(shape.to_vec(), |_| T::from_f64(rng.random::<f64>())).expect("benchmark shape")
}

/// An independent pair of square grids.
pub fn square_pair<T: Sample>(side: usize, seed: u64) -> (Grid<T>, Grid<T>) {
    (
        uniform(&[side, side], seed),
        uniform(&[side, side], seed.wrapping_add(1)),
    )
}
