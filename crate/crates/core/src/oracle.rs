//! Brute-force sliding-window correlation with the mean-subtraction formula.
//!
//! Every window is gathered into a pair of flat vectors and correlated from
//! scratch. This is slow (work grows with the window volume) and exists as
//! the reference the optimized correlator is measured against.

use crate::error::Result;
use crate::grid::{strides, Grid, MissingPolicy, Sample};
use crate::window::{advance, is_interior, WindowSpec};

/// Classical two-pass Pearson correlation of two equally long samples.
///
/// Returns `None` when the correlation is undefined: fewer than two samples,
/// or either sample constant (all values exactly equal).
///
/// # Panics
///
/// Panics if `x` and `y` have different lengths.
pub fn pearson_classical(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "samples must have equal length");
    if x.len() < 2 || is_constant(x) || is_constant(y) {
        return None;
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    let denom = (var_x * var_y).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some(cov / denom)
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Flat offsets of every window cell relative to the window's lowest corner.
pub(crate) fn window_offsets(shape: &[usize], w: &WindowSpec) -> Vec<usize> {
    let st = strides(shape);
    let lengths = w.lengths();
    let mut idx = vec![0; lengths.len()];
    let mut out = Vec::with_capacity(w.sample_count());
    loop {
        out.push(idx.iter().zip(&st).map(|(i, s)| i * s).sum());
        if !advance(&mut idx, lengths) {
            break;
        }
    }
    out
}

/// Gathers windows and evaluates them with [`pearson_classical`].
pub(crate) struct WindowGather<'a, T> {
    x: &'a [T],
    y: &'a [T],
    offsets: Vec<usize>,
    /// Flat distance from a window's middle cell back to its lowest corner.
    back: usize,
    policy: MissingPolicy,
    bx: Vec<f64>,
    by: Vec<f64>,
}

impl<'a, T: Sample> WindowGather<'a, T> {
    pub(crate) fn new(
        x: &'a Grid<T>,
        y: &'a Grid<T>,
        w: &WindowSpec,
        policy: MissingPolicy,
    ) -> Self {
        let st = strides(x.shape());
        let back = w.half_widths().iter().zip(&st).map(|(h, s)| h * s).sum();
        let n = w.sample_count();
        WindowGather {
            x: x.as_slice(),
            y: y.as_slice(),
            offsets: window_offsets(x.shape(), w),
            back,
            policy,
            bx: Vec::with_capacity(n),
            by: Vec::with_capacity(n),
        }
    }

    /// Correlation of the window centred at flat offset `center`, which must
    /// be an interior position. `None` for missing or degenerate windows.
    pub(crate) fn correlate_at(&mut self, center: usize) -> Option<f64> {
        let base = center - self.back;
        self.bx.clear();
        self.by.clear();
        for &o in &self.offsets {
            let a = self.x[base + o].to_f64();
            let b = self.y[base + o].to_f64();
            if self.policy.is_missing(a) || self.policy.is_missing(b) {
                return None;
            }
            self.bx.push(a);
            self.by.push(b);
        }
        pearson_classical(&self.bx, &self.by)
    }
}

/// Reference correlation map: same shape as the inputs, with
/// `policy.fill_value` on the border, on windows touching a missing sample in
/// either input, and on windows constant in either input.
pub fn naive_correlate_map<T: Sample>(
    x: &Grid<T>,
    y: &Grid<T>,
    w: &WindowSpec,
    policy: &MissingPolicy,
) -> Result<Grid<f64>> {
    x.ensure_same_shape(y)?;
    w.check_fits(x.shape())?;
    policy.validate()?;

    let shape = x.shape();
    let half = w.half_widths();
    let mut gather = WindowGather::new(x, y, w, *policy);
    let mut out = Vec::with_capacity(x.len());
    let mut idx = vec![0; shape.len()];
    for flat in 0..x.len() {
        let value = if is_interior(&idx, shape, &half) {
            gather.correlate_at(flat).unwrap_or(policy.fill_value)
        } else {
            policy.fill_value
        };
        out.push(value);
        advance(&mut idx, shape);
    }
    Grid::new(shape.to_vec(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_correlations() {
        assert_eq!(
            pearson_classical(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]),
            Some(1.0)
        );
        assert_eq!(
            pearson_classical(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]),
            Some(-1.0)
        );
    }

    #[test]
    fn hand_evaluated_reference() {
        // Deviations (-1.5,-0.5,0.5,1.5) and (-1.5,0.5,-0.5,1.5): 4 / sqrt(5 * 5).
        let c = pearson_classical(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((c - 0.8).abs() < 1e-15, "{c}");
    }

    #[test]
    fn undefined_cases() {
        assert_eq!(pearson_classical(&[4.0, 4.0, 4.0], &[1.0, 2.0, 3.0]), None);
        assert_eq!(pearson_classical(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]), None);
        assert_eq!(pearson_classical(&[1.0], &[2.0]), None);
    }

    fn ramp(n: usize) -> Grid<f64> {
        Grid::from_fn([n, n], |i| i as f64).unwrap()
    }

    #[test]
    fn self_correlation_and_border() {
        let g = ramp(9);
        let w = WindowSpec::cube(3, 2).unwrap();
        let out = naive_correlate_map(&g, &g, &w, &MissingPolicy::default()).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let v = out[&[i, j][..]];
                if i == 0 || j == 0 || i == 8 || j == 8 {
                    assert_eq!(v, -2.0);
                } else {
                    assert!((v - 1.0).abs() < 1e-12, "({i},{j}) = {v}");
                }
            }
        }
    }

    #[test]
    fn missing_sample_fills_covering_windows() {
        // Deterministic pseudo-random fill without pulling in an RNG.
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut x = Grid::from_fn([9, 9], |_| next()).unwrap();
        let y = Grid::from_fn([9, 9], |_| next()).unwrap();
        *x.get_mut(&[4, 4]).unwrap() = -1000.0;
        let w = WindowSpec::cube(3, 2).unwrap();
        let out = naive_correlate_map(&x, &y, &w, &MissingPolicy::default()).unwrap();
        for i in 1..8 {
            for j in 1..8 {
                let v = out[&[i, j][..]];
                if (3..=5).contains(&i) && (3..=5).contains(&j) {
                    assert_eq!(v, -2.0, "({i},{j})");
                } else {
                    assert!((-1.0..=1.0).contains(&v), "({i},{j}) = {v}");
                }
            }
        }
    }

    #[test]
    fn window_must_fit() {
        let g = ramp(4);
        let w = WindowSpec::cube(7, 2).unwrap();
        let err = naive_correlate_map(&g, &g, &w, &MissingPolicy::default()).unwrap_err();
        assert!(matches!(err, crate::Error::Shape(_)));
    }

    #[test]
    fn offsets_cover_window() {
        let w = WindowSpec::new([3, 3]).unwrap();
        assert_eq!(
            window_offsets(&[5, 5], &w),
            vec![0, 1, 2, 5, 6, 7, 10, 11, 12]
        );
    }
}
