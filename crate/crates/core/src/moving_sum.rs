//! Sliding-window sums along one axis and their separable composition.
//!
//! A box sum over an n-dimensional window is computed as n one-dimensional
//! passes, each a rolling update (add the entering sample, subtract the
//! leaving one) along every lane of one axis. Work per pass is linear in the
//! grid size whatever the window length.
//!
//! Only positions at least `k / 2` from both ends of a lane receive a sum;
//! the remaining edge positions hold unspecified values. Callers restrict
//! themselves to the interior, where the whole window fits.
//!
//! The prefix-sum route ([`window_sum_via_cumsum`]) produces the same
//! interior values through n-dimensional cumulative sums and corner
//! inclusion-exclusion.

use std::ops::Range;

use crate::error::{param_err, Result};
use crate::grid::{Grid, Sample};
use crate::parallel::{plan_parallel, run_ranges, DisjointSlice, Stage};
use crate::window::{advance, is_interior, unravel, WindowSpec};

/// Lanes along a non-contiguous axis are processed in column tiles of this
/// width so the running accumulators stay in cache.
const TILE: usize = 256;

/// A sliding sum of odd `length` along `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisSum {
    pub axis: usize,
    pub length: usize,
}

impl AxisSum {
    pub fn new(axis: usize, length: usize) -> Self {
        AxisSum { axis, length }
    }

    fn validate(&self, shape: &[usize]) -> Result<()> {
        if self.axis >= shape.len() {
            return Err(param_err!(
                "axis {} out of range for a {}-dimensional grid",
                self.axis,
                shape.len()
            ));
        }
        check_length(self.length, shape[self.axis])
    }
}

fn check_length(k: usize, extent: usize) -> Result<()> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(param_err!("window length must be odd, got {k}"));
    }
    if k > extent {
        return Err(param_err!("window length {k} exceeds lane length {extent}"));
    }
    Ok(())
}

#[derive(Clone, Copy)]
pub(crate) enum LaneOp {
    Window(usize),
    Prefix,
}

/// Rolling window sum over one lane accessed through `get`/`put`.
///
/// Reads `2 * len - k` samples in total.
#[inline(always)]
fn rolling_lane(
    len: usize,
    k: usize,
    mut get: impl FnMut(usize) -> f64,
    mut put: impl FnMut(usize, f64),
) {
    let h = k / 2;
    let mut acc = 0.0;
    for i in 0..k {
        acc += get(i);
    }
    put(h, acc);
    for p in h + 1..len - h {
        acc = acc + get(p + h) - get(p - h - 1);
        put(p, acc);
    }
}

#[inline(always)]
fn prefix_lane(len: usize, mut get: impl FnMut(usize) -> f64, mut put: impl FnMut(usize, f64)) {
    let mut acc = 0.0;
    for i in 0..len {
        acc += get(i);
        put(i, acc);
    }
}

/// Applies `op` to lanes `lanes` of the pass along `axis`.
///
/// Lane `l` is the run at outer block `l / inner`, inner offset `l % inner`.
/// A lane's arithmetic is identical whether it is handled by the contiguous
/// kernel or the tiled kernel, and independent of how lanes are grouped.
fn run_lanes<S: Sample>(
    src: &[S],
    shape: &[usize],
    axis: usize,
    op: LaneOp,
    out: &DisjointSlice<'_, f64>,
    lanes: Range<usize>,
) {
    let extent = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let mut acc = Vec::new();
    let mut l = lanes.start;
    while l < lanes.end {
        let outer = l / inner;
        let i0 = l % inner;
        let i1 = inner.min(i0 + (lanes.end - l)).min(i0 + TILE);
        let base = outer * extent * inner;
        if inner == 1 {
            let lane = &src[base..base + extent];
            // SAFETY: lane `l` owns output elements base..base+extent.
            let dst = unsafe { out.slice_mut(base..base + extent) };
            match op {
                LaneOp::Window(k) => {
                    rolling_lane(extent, k, |i| lane[i].to_f64(), |i, v| dst[i] = v)
                }
                LaneOp::Prefix => prefix_lane(extent, |i| lane[i].to_f64(), |i, v| dst[i] = v),
            }
        } else {
            tiled_lanes(src, base, extent, inner, i0..i1, op, out, &mut acc);
        }
        l += i1 - i0;
    }
}

/// Processes lanes `cols` of one outer block together, stepping along the
/// axis row by row so every memory access is contiguous.
#[allow(clippy::too_many_arguments)]
fn tiled_lanes<S: Sample>(
    src: &[S],
    base: usize,
    extent: usize,
    inner: usize,
    cols: Range<usize>,
    op: LaneOp,
    out: &DisjointSlice<'_, f64>,
    acc: &mut Vec<f64>,
) {
    let width = cols.len();
    acc.clear();
    acc.resize(width, 0.0);
    let row = |p: usize| {
        let start = base + p * inner + cols.start;
        &src[start..start + width]
    };
    // SAFETY: these columns of this outer block belong to the calling lane
    // range only.
    let dst = |p: usize| unsafe {
        let start = base + p * inner + cols.start;
        out.slice_mut(start..start + width)
    };
    match op {
        LaneOp::Window(k) => {
            let h = k / 2;
            for j in 0..k {
                for (a, v) in acc.iter_mut().zip(row(j)) {
                    *a += v.to_f64();
                }
            }
            dst(h).copy_from_slice(acc);
            for p in h + 1..extent - h {
                let enter = row(p + h);
                let leave = row(p - h - 1);
                let d = dst(p);
                for c in 0..width {
                    acc[c] = acc[c] + enter[c].to_f64() - leave[c].to_f64();
                    d[c] = acc[c];
                }
            }
        }
        LaneOp::Prefix => {
            for p in 0..extent {
                let d = dst(p);
                for ((a, v), o) in acc.iter_mut().zip(row(p)).zip(d.iter_mut()) {
                    *a += v.to_f64();
                    *o = *a;
                }
            }
        }
    }
}

/// One pass of `op` along `axis`, writing into `out` (same length as `src`).
/// Edge positions of window passes are not written.
pub(crate) fn axis_pass<S: Sample>(
    src: &[S],
    shape: &[usize],
    axis: usize,
    op: LaneOp,
    out: &mut [f64],
    threads: usize,
) {
    debug_assert_eq!(src.len(), out.len());
    let ranges = plan_parallel(shape, Stage::Axis(axis), threads);
    let out = DisjointSlice::new(out);
    run_ranges(&ranges, |lanes| {
        run_lanes(src, shape, axis, op, &out, lanes)
    });
}

/// Centred sliding sums of length `k` along a sequence.
///
/// Positions closer than `k / 2` to either end are zero.
pub fn moving_sum_1d<T: Sample>(row: &[T], k: usize) -> Result<Vec<f64>> {
    if row.is_empty() {
        return Err(param_err!("cannot slide a window over an empty sequence"));
    }
    check_length(k, row.len())?;
    let mut out = vec![0.0; row.len()];
    rolling_lane(row.len(), k, |i| row[i].to_f64(), |i, v| out[i] = v);
    Ok(out)
}

/// Sliding sums along one axis of `g`, applied to every lane independently.
pub fn moving_sum_axis<T: Sample>(g: &Grid<T>, s: AxisSum) -> Result<Grid<f64>> {
    moving_sum_axis_parallel(g, s, 1)
}

pub fn moving_sum_axis_parallel<T: Sample>(
    g: &Grid<T>,
    s: AxisSum,
    threads: usize,
) -> Result<Grid<f64>> {
    s.validate(g.shape())?;
    let mut out = vec![0.0; g.len()];
    axis_pass(
        g.as_slice(),
        g.shape(),
        s.axis,
        LaneOp::Window(s.length),
        &mut out,
        threads.max(1),
    );
    Grid::new(g.shape().to_vec(), out)
}

/// Box sums over windows centred at each interior position, as one sliding
/// pass per axis (last axis first). Values outside the interior are
/// unspecified.
pub fn separable_window_sum<T: Sample>(g: &Grid<T>, w: &WindowSpec) -> Result<Grid<f64>> {
    separable_window_sum_parallel(g, w, 1)
}

pub fn separable_window_sum_parallel<T: Sample>(
    g: &Grid<T>,
    w: &WindowSpec,
    threads: usize,
) -> Result<Grid<f64>> {
    let order: Vec<usize> = (0..g.ndim()).rev().collect();
    separable_window_sum_ordered(g, w, &order, threads)
}

/// As [`separable_window_sum`] with an explicit axis order, which must be a
/// permutation of the grid's axes.
pub fn separable_window_sum_ordered<T: Sample>(
    g: &Grid<T>,
    w: &WindowSpec,
    order: &[usize],
    threads: usize,
) -> Result<Grid<f64>> {
    w.check_fits(g.shape())?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..g.ndim()).collect::<Vec<_>>() {
        return Err(param_err!(
            "axis order {order:?} is not a permutation of the grid axes"
        ));
    }
    let mut out = vec![0.0; g.len()];
    separable_into(
        g.as_slice(),
        g.shape(),
        w.lengths(),
        order,
        threads.max(1),
        &mut out,
        &mut Vec::new(),
    );
    Grid::new(g.shape().to_vec(), out)
}

/// Separable box sum of `src` into `out`, using `scratch` as the ping-pong
/// buffer. `out` must be zeroed on entry.
pub(crate) fn separable_into<S: Sample>(
    src: &[S],
    shape: &[usize],
    lengths: &[usize],
    order: &[usize],
    threads: usize,
    out: &mut [f64],
    scratch: &mut Vec<f64>,
) {
    let (&first, rest) = order.split_first().expect("at least one axis");
    // Arrange the ping-pong so the final pass lands in `out`.
    if rest.len() % 2 == 0 {
        axis_pass(
            src,
            shape,
            first,
            LaneOp::Window(lengths[first]),
            out,
            threads,
        );
    } else {
        scratch.clear();
        scratch.resize(src.len(), 0.0);
        axis_pass(
            src,
            shape,
            first,
            LaneOp::Window(lengths[first]),
            scratch,
            threads,
        );
    }
    for (i, &axis) in rest.iter().enumerate() {
        let remaining = rest.len() - i - 1;
        let op = LaneOp::Window(lengths[axis]);
        if remaining % 2 == 0 {
            axis_pass(&scratch[..], shape, axis, op, out, threads);
        } else {
            if scratch.len() != src.len() {
                scratch.resize(src.len(), 0.0);
            }
            axis_pass(&out[..], shape, axis, op, scratch, threads);
        }
    }
}

/// Inclusive cumulative sums along `axis`.
pub fn cumulative_sum_axis<T: Sample>(g: &Grid<T>, axis: usize) -> Result<Grid<f64>> {
    if axis >= g.ndim() {
        return Err(param_err!(
            "axis {axis} out of range for a {}-dimensional grid",
            g.ndim()
        ));
    }
    let mut out = vec![0.0; g.len()];
    axis_pass(g.as_slice(), g.shape(), axis, LaneOp::Prefix, &mut out, 1);
    Grid::new(g.shape().to_vec(), out)
}

/// Box sums over windows centred at each interior position, via an
/// n-dimensional prefix sum and inclusion-exclusion over the 2^n corners of
/// each window. Non-interior positions are zero.
pub fn window_sum_via_cumsum<T: Sample>(g: &Grid<T>, w: &WindowSpec) -> Result<Grid<f64>> {
    window_sum_via_cumsum_parallel(g, w, 1)
}

pub fn window_sum_via_cumsum_parallel<T: Sample>(
    g: &Grid<T>,
    w: &WindowSpec,
    threads: usize,
) -> Result<Grid<f64>> {
    w.check_fits(g.shape())?;
    let mut out = vec![0.0; g.len()];
    cumsum_into(
        g.as_slice(),
        g.shape(),
        w,
        threads.max(1),
        &mut out,
        &mut Vec::new(),
        &mut Vec::new(),
    );
    Grid::new(g.shape().to_vec(), out)
}

/// Prefix-sum route into `out` (zeroed on entry), using two scratch buffers.
pub(crate) fn cumsum_into<S: Sample>(
    src: &[S],
    shape: &[usize],
    w: &WindowSpec,
    threads: usize,
    out: &mut [f64],
    prefix: &mut Vec<f64>,
    scratch: &mut Vec<f64>,
) {
    let ndim = shape.len();
    prefix.clear();
    prefix.resize(src.len(), 0.0);
    axis_pass(src, shape, 0, LaneOp::Prefix, prefix, threads);
    if ndim > 1 {
        scratch.clear();
        scratch.resize(src.len(), 0.0);
        for axis in 1..ndim {
            axis_pass(&prefix[..], shape, axis, LaneOp::Prefix, scratch, threads);
            std::mem::swap(prefix, scratch);
        }
    }

    let strides = crate::grid::strides(shape);
    let half = w.half_widths();
    let prefix = &prefix[..];
    let ranges = plan_parallel(shape, Stage::Elementwise, threads);
    let dst = DisjointSlice::new(out);
    run_ranges(&ranges, |range| {
        let mut idx = vec![0; ndim];
        unravel(range.start, shape, &mut idx);
        // SAFETY: element blocks are disjoint.
        let block = unsafe { dst.slice_mut(range.clone()) };
        for slot in block.iter_mut() {
            if is_interior(&idx, shape, &half) {
                *slot = corner_sum(prefix, &idx, &half, &strides);
            }
            advance(&mut idx, shape);
        }
    });
}

/// Inclusion-exclusion over the corners of the window centred at `idx`.
/// Corners whose lower coordinate falls before the grid contribute zero.
#[inline]
fn corner_sum(prefix: &[f64], idx: &[usize], half: &[usize], strides: &[usize]) -> f64 {
    let ndim = idx.len();
    let mut total = 0.0;
    'corners: for mask in 0u32..(1 << ndim) {
        let mut off = 0;
        for d in 0..ndim {
            let c = if mask & (1 << d) != 0 {
                // lower corner: one before the window start
                match (idx[d] - half[d]).checked_sub(1) {
                    Some(c) => c,
                    None => continue 'corners,
                }
            } else {
                idx[d] + half[d]
            };
            off += c * strides[d];
        }
        if mask.count_ones() % 2 == 0 {
            total += prefix[off];
        } else {
            total -= prefix[off];
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn centers(v: &[f64], k: usize) -> Vec<f64> {
        v[k / 2..v.len() - k / 2].to_vec()
    }

    #[test]
    fn one_dimensional_sums() {
        let out = moving_sum_1d(&[1.0; 5], 3).unwrap();
        assert_eq!(centers(&out, 3), vec![3.0, 3.0, 3.0]);
        let out = moving_sum_1d(&[1.0, 2.0, 3.0, 4.0, 5.0], 3).unwrap();
        assert_eq!(centers(&out, 3), vec![6.0, 9.0, 12.0]);
        assert!(matches!(
            moving_sum_1d(&[1.0, 2.0, 3.0], 5),
            Err(crate::Error::Parameter(_))
        ));
        assert!(moving_sum_1d(&[1.0, 2.0, 3.0, 4.0], 2).is_err());
    }

    #[test]
    fn reads_are_linear_in_length() {
        for len in [1usize, 2, 7, 50, 301] {
            for k in (1..=len).step_by(2) {
                let reads = Cell::new(0usize);
                let row: Vec<f64> = (0..len).map(|i| i as f64).collect();
                let mut out = vec![0.0; len];
                rolling_lane(
                    len,
                    k,
                    |i| {
                        reads.set(reads.get() + 1);
                        row[i]
                    },
                    |i, v| out[i] = v,
                );
                assert!(
                    reads.get() <= 2 * len,
                    "len {len} k {k}: {} reads",
                    reads.get()
                );
            }
        }
    }

    #[test]
    fn axis_sums() {
        let ones = Grid::new([3, 3], vec![1.0; 9]).unwrap();
        let rows = moving_sum_axis(&ones, AxisSum::new(1, 3)).unwrap();
        for i in 0..3 {
            assert_eq!(rows[&[i, 1][..]], 3.0);
        }

        let ramp = Grid::from_fn([3, 3], |i| i as f64).unwrap();
        let cols = moving_sum_axis(&ramp, AxisSum::new(0, 3)).unwrap();
        assert_eq!(&cols.as_slice()[3..6], &[9.0, 12.0, 15.0]);

        let line = Grid::new([5], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let a = moving_sum_axis(&line, AxisSum::new(0, 3)).unwrap();
        assert_eq!(
            a.as_slice(),
            moving_sum_1d(line.as_slice(), 3).unwrap().as_slice()
        );

        assert!(moving_sum_axis(&ones, AxisSum::new(2, 3)).is_err());
        assert!(moving_sum_axis(&ones, AxisSum::new(0, 5)).is_err());
    }

    #[test]
    fn all_ones_box() {
        let g = Grid::new([9, 9], vec![1.0; 81]).unwrap();
        let w = WindowSpec::cube(3, 2).unwrap();
        for s in [
            separable_window_sum(&g, &w).unwrap(),
            window_sum_via_cumsum(&g, &w).unwrap(),
        ] {
            for i in 1..8 {
                for j in 1..8 {
                    assert_eq!(s[&[i, j][..]], 9.0);
                }
            }
        }
    }

    #[test]
    fn prefix_along_axis() {
        let g = Grid::new([4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(
            cumulative_sum_axis(&g, 0).unwrap().as_slice(),
            &[1.0, 3.0, 6.0, 10.0]
        );
        let g = Grid::new([2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(
            cumulative_sum_axis(&g, 0).unwrap().as_slice(),
            &[1.0, 2.0, 4.0, 6.0]
        );
        assert!(cumulative_sum_axis(&g, 2).is_err());
    }

    #[test]
    fn tiled_and_contiguous_lanes_agree() {
        // 3 x 600 grid: column pass spans several tiles.
        let g = Grid::from_fn([5, 600], |i| ((i * 7919) % 101) as f64 * 0.37).unwrap();
        let by_cols = moving_sum_axis(&g, AxisSum::new(0, 3)).unwrap();
        let mut t = [0.0; 5];
        for c in 0..600 {
            let col: Vec<f64> = (0..5).map(|r| g[&[r, c][..]]).collect();
            let s = moving_sum_1d(&col, 3).unwrap();
            t[1..4].copy_from_slice(&s[1..4]);
            for r in 1..4 {
                assert_eq!(by_cols[&[r, c][..]].to_bits(), t[r].to_bits());
            }
        }
    }

    #[test]
    fn order_must_be_permutation() {
        let g = Grid::new([3, 3], vec![1.0; 9]).unwrap();
        let w = WindowSpec::cube(3, 2).unwrap();
        assert!(separable_window_sum_ordered(&g, &w, &[0, 0], 1).is_err());
        assert!(separable_window_sum_ordered(&g, &w, &[0], 1).is_err());
        assert!(separable_window_sum_ordered(&g, &w, &[0, 1], 1).is_ok());
    }
}
