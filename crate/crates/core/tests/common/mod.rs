#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slidecorr_core::{Grid, Sample};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform samples in [0, 1).
pub fn uniform<T: Sample>(shape: &[usize], seed: u64) -> Grid<T> {
    let mut r = rng(seed);
    Grid::from_fn(shape.to_vec(), |_| T::from_f64(r.random::<f64>())).unwrap()
}

/// Integers in [-50, 50], exactly representable in every precision.
pub fn integers(shape: &[usize], seed: u64) -> Grid<f64> {
    let mut r = rng(seed);
    Grid::from_fn(shape.to_vec(), |_| r.random_range(-50i32..=50) as f64).unwrap()
}

/// Brute-force box sum around `center` (the window must fit).
pub fn brute_window_sum(g: &Grid<f64>, center: &[usize], lengths: &[usize]) -> f64 {
    let ndim = center.len();
    let mut idx: Vec<usize> = (0..ndim).map(|d| center[d] - lengths[d] / 2).collect();
    let lo = idx.clone();
    let mut total = 0.0;
    loop {
        total += g[&idx[..]];
        let mut d = ndim;
        loop {
            if d == 0 {
                return total;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < lo[d] + lengths[d] {
                break;
            }
            idx[d] = lo[d];
        }
    }
}

/// Every multi-index of `shape` in row-major order.
pub fn positions(shape: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = shape.iter().product();
    (0..total)
        .map(|mut flat| {
            let mut idx = vec![0; shape.len()];
            for d in (0..shape.len()).rev() {
                idx[d] = flat % shape[d];
                flat /= shape[d];
            }
            idx
        })
        .collect()
}

pub fn interior(idx: &[usize], shape: &[usize], lengths: &[usize]) -> bool {
    idx.iter()
        .zip(shape)
        .zip(lengths)
        .all(|((&i, &e), &k)| i >= k / 2 && i + k / 2 < e)
}

/// Textbook Pearson correlation written independently of the library.
pub fn reference_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0]) {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    Some(num / (sx.sqrt() * sy.sqrt()))
}

/// Brute-force n-D correlation map written without the library's window
/// machinery: fill on border, on missing samples (<= -999) and constant windows.
pub fn brute_correlation_map(x: &Grid<f64>, y: &Grid<f64>, lengths: &[usize]) -> Vec<f64> {
    let shape = x.shape();
    positions(shape)
        .into_iter()
        .map(|idx| {
            if !interior(&idx, shape, lengths) {
                return -2.0;
            }
            let lo: Vec<usize> = idx.iter().zip(lengths).map(|(&i, &k)| i - k / 2).collect();
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for off in positions(lengths) {
                let p: Vec<usize> = lo.iter().zip(&off).map(|(a, b)| a + b).collect();
                let (a, b) = (x[&p[..]], y[&p[..]]);
                if a <= -999.0 || b <= -999.0 {
                    return -2.0;
                }
                xs.push(a);
                ys.push(b);
            }
            reference_pearson(&xs, &ys).unwrap_or(-2.0)
        })
        .collect()
}
