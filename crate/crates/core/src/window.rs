use std::fmt;

use crate::error::{param_err, shape_err, Result};

/// Per-axis window lengths. Every length is odd so that each window has a
/// well-defined middle cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WindowSpec {
    lengths: Vec<usize>,
}

impl WindowSpec {
    pub fn new(lengths: impl Into<Vec<usize>>) -> Result<Self> {
        let lengths = lengths.into();
        if lengths.is_empty() {
            return Err(param_err!("window needs at least one axis"));
        }
        for (axis, &k) in lengths.iter().enumerate() {
            if k == 0 || k % 2 == 0 {
                return Err(param_err!(
                    "window lengths must be odd (axis {axis} has length {k})"
                ));
            }
        }
        Ok(WindowSpec { lengths })
    }

    /// The same length `k` along each of `ndim` axes.
    pub fn cube(k: usize, ndim: usize) -> Result<Self> {
        WindowSpec::new(vec![k; ndim])
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn ndim(&self) -> usize {
        self.lengths.len()
    }

    /// Number of samples in one window.
    pub fn sample_count(&self) -> usize {
        self.lengths.iter().product()
    }

    /// Per-axis distance from the middle cell to the window edge.
    pub fn half_widths(&self) -> Vec<usize> {
        self.lengths.iter().map(|k| k / 2).collect()
    }

    /// Checks that the window matches the dimensionality of `shape` and fits
    /// inside it along every axis.
    pub fn check_fits(&self, shape: &[usize]) -> Result<()> {
        if shape.len() != self.lengths.len() {
            return Err(shape_err!(
                "window has {} axes but the grid has {}",
                self.lengths.len(),
                shape.len()
            ));
        }
        for (axis, (&k, &e)) in self.lengths.iter().zip(shape).enumerate() {
            if k > e {
                return Err(shape_err!(
                    "window length {k} exceeds extent {e} along axis {axis}"
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.lengths.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

/// True when a window of the given half-widths centred on `index` lies
/// entirely inside `shape`.
#[inline]
pub(crate) fn is_interior(index: &[usize], shape: &[usize], half: &[usize]) -> bool {
    index
        .iter()
        .zip(shape)
        .zip(half)
        .all(|((&i, &e), &h)| i >= h && i + h < e)
}

/// Advances a row-major multi-index by one position; returns false on wrap.
#[inline]
pub(crate) fn advance(index: &mut [usize], shape: &[usize]) -> bool {
    for d in (0..shape.len()).rev() {
        index[d] += 1;
        if index[d] < shape[d] {
            return true;
        }
        index[d] = 0;
    }
    false
}

/// Multi-index of flat offset `flat` in `shape`.
pub(crate) fn unravel(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for d in (0..shape.len()).rev() {
        out[d] = flat % shape[d];
        flat /= shape[d];
    }
}
