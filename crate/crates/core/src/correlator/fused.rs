//! The separable backend as a single streaming sweep along axis 0.
//!
//! For each slab (a row in 2-D) the products are formed and summed over the
//! window along the remaining axes; a ring of the last `k0` slab sums feeds
//! rolling sums along axis 0, and each coefficient is evaluated as soon as
//! its window sums are complete. Only the output grid is full-sized.
//!
//! Axis-0 accumulators are rebuilt from the ring at the start of every band
//! of [`BAND`] output slabs. Bands are fixed by the grid alone and handed out
//! whole to workers, so every value is computed the same way for any thread
//! count.

use super::{resolve, valid_mean, WindowSums};
use crate::grid::{Grid, MissingPolicy, Sample};
use crate::moving_sum::{axis_pass, LaneOp};
use crate::oracle::WindowGather;
use crate::parallel::{balanced_ranges, run_ranges, DisjointSlice};
use crate::window::{advance, is_interior, WindowSpec};

/// Output slabs per band.
const BAND: usize = 64;

pub(super) fn correlate_separable<T: Sample>(
    x: &Grid<T>,
    y: &Grid<T>,
    w: &WindowSpec,
    policy: &MissingPolicy,
    epsilon: f64,
    threads: usize,
) -> Vec<f64> {
    let any_missing = x
        .as_slice()
        .iter()
        .chain(y.as_slice())
        .any(|v| policy.is_missing(v.to_f64()));
    if any_missing {
        Sweep::<T, 6>::new(x, y, w, policy, epsilon).run(threads)
    } else {
        Sweep::<T, 5>::new(x, y, w, policy, epsilon).run(threads)
    }
}

type Fields<const F: usize> = [Vec<f64>; F];

/// `F` fields: Σx, Σy, Σxy, Σx², Σy², plus the missing count when `F == 6`.
struct Sweep<'a, T, const F: usize> {
    x: &'a Grid<T>,
    y: &'a Grid<T>,
    w: &'a WindowSpec,
    policy: MissingPolicy,
    epsilon: f64,
    /// Extent and window length along axis 0; 1 and 1 for 1-D input, which
    /// is treated as a single slab.
    e0: usize,
    k0: usize,
    /// Shape and window lengths of one slab.
    slab_shape: Vec<usize>,
    slab_lengths: Vec<usize>,
    inner: usize,
    shift: (f64, f64),
}

impl<'a, T: Sample, const F: usize> Sweep<'a, T, F> {
    fn new(
        x: &'a Grid<T>,
        y: &'a Grid<T>,
        w: &'a WindowSpec,
        policy: &MissingPolicy,
        epsilon: f64,
    ) -> Self {
        let (e0, k0, slab_shape, slab_lengths) = if x.ndim() == 1 {
            (1, 1, x.shape().to_vec(), w.lengths().to_vec())
        } else {
            (
                x.shape()[0],
                w.lengths()[0],
                x.shape()[1..].to_vec(),
                w.lengths()[1..].to_vec(),
            )
        };
        Sweep {
            x,
            y,
            w,
            policy: *policy,
            epsilon,
            e0,
            k0,
            inner: slab_shape.iter().product(),
            slab_shape,
            slab_lengths,
            shift: (
                valid_mean(x.as_slice(), policy),
                valid_mean(y.as_slice(), policy),
            ),
        }
    }

    fn run(&self, threads: usize) -> Vec<f64> {
        let fill = self.policy.fill_value;
        let mut out = vec![fill; self.x.len()];
        let h0 = self.k0 / 2;
        let rows = self.e0 - 2 * h0;
        let bands = rows.div_ceil(BAND);
        let columns_ok = self.interior_columns();
        let dst = DisjointSlice::new(&mut out);
        run_ranges(&balanced_ranges(bands, threads), |bands| {
            let first = h0 + bands.start * BAND;
            let last = (h0 + bands.end * BAND).min(self.e0 - h0);
            self.sweep_rows(first..last, &columns_ok, &dst);
        });
        out
    }

    /// Which offsets within a slab are interior along the slab's axes.
    fn interior_columns(&self) -> Vec<bool> {
        let shape = &self.slab_shape;
        let half: Vec<usize> = self.slab_lengths.iter().map(|k| k / 2).collect();
        let mut idx = vec![0; shape.len()];
        (0..self.inner)
            .map(|_| {
                let ok = is_interior(&idx, shape, &half);
                advance(&mut idx, shape);
                ok
            })
            .collect()
    }

    /// Element values of every field at flat index `i`.
    #[inline(always)]
    fn load(&self, xs: &[T], ys: &[T], i: usize) -> [f64; F] {
        let a = xs[i].to_f64();
        let b = ys[i].to_f64();
        let mut v = [0.0; F];
        if F == 6 && (self.policy.is_missing(a) || self.policy.is_missing(b)) {
            v[5] = 1.0;
        } else {
            let a = a - self.shift.0;
            let b = b - self.shift.1;
            v[0] = a;
            v[1] = b;
            v[2] = a * b;
            v[3] = a * a;
            v[4] = b * b;
        }
        v
    }

    /// Window sums over the slab axes of slab `r`, into `out`. Offsets that
    /// are not interior within the slab hold unspecified values.
    fn slab_sums(&self, r: usize, out: &mut Fields<F>, scratch: &mut Vec<f64>) {
        let (xs, ys) = (self.x.as_slice(), self.y.as_slice());
        let nd = self.slab_shape.len();
        let e = self.slab_shape[nd - 1];
        let k = self.slab_lengths[nd - 1];
        let h = k / 2;
        for lane in 0..self.inner / e {
            let o = lane * e;
            let base = r * self.inner + o;
            let mut acc = [0.0; F];
            for i in 0..k {
                let v = self.load(xs, ys, base + i);
                for f in 0..F {
                    acc[f] += v[f];
                }
            }
            for f in 0..F {
                out[f][o + h] = acc[f];
            }
            for p in h + 1..e - h {
                let enter = self.load(xs, ys, base + p + h);
                let leave = self.load(xs, ys, base + p - h - 1);
                for f in 0..F {
                    acc[f] = acc[f] + enter[f] - leave[f];
                    out[f][o + p] = acc[f];
                }
            }
        }
        for axis in (0..nd - 1).rev() {
            let op = LaneOp::Window(self.slab_lengths[axis]);
            for field in out.iter_mut() {
                scratch.resize(self.inner, 0.0);
                axis_pass(&field[..], &self.slab_shape, axis, op, scratch, 1);
                std::mem::swap(field, scratch);
            }
        }
    }

    /// Evaluates output slabs `rows`, which start on a band boundary.
    fn sweep_rows(
        &self,
        rows: std::ops::Range<usize>,
        columns_ok: &[bool],
        dst: &DisjointSlice<'_, f64>,
    ) {
        if rows.is_empty() {
            return;
        }
        let inner = self.inner;
        let h0 = self.k0 / 2;
        let n = self.w.sample_count();
        let fill = self.policy.fill_value;
        let new_fields = || -> Fields<F> { std::array::from_fn(|_| vec![0.0; inner]) };

        let mut gather = WindowGather::new(self.x, self.y, self.w, self.policy);
        // Slab `r` lives in ring slot `r % k0`.
        let mut ring: Vec<Fields<F>> = (0..self.k0).map(|_| new_fields()).collect();
        let mut incoming = new_fields();
        let mut acc = new_fields();
        let mut scratch = Vec::new();
        for r in rows.start - h0..rows.start + h0 {
            self.slab_sums(r, &mut ring[r % self.k0], &mut scratch);
        }

        for p in rows {
            let enter = p + h0;
            let slot = enter % self.k0;
            self.slab_sums(enter, &mut incoming, &mut scratch);
            if (p - h0).is_multiple_of(BAND) {
                std::mem::swap(&mut ring[slot], &mut incoming);
                for (f, a) in acc.iter_mut().enumerate() {
                    a.fill(0.0);
                    for r in p - h0..=p + h0 {
                        for (a, v) in a.iter_mut().zip(&ring[r % self.k0][f]) {
                            *a += v;
                        }
                    }
                }
            } else {
                for (f, a) in acc.iter_mut().enumerate() {
                    let leave = &ring[slot][f];
                    for ((a, &u), &v) in a.iter_mut().zip(&incoming[f]).zip(leave) {
                        *a = *a + u - v;
                    }
                }
                std::mem::swap(&mut ring[slot], &mut incoming);
            }

            let start = p * inner;
            // SAFETY: output slab `p` belongs to this worker's bands only.
            let d = unsafe { dst.slice_mut(start..start + inner) };
            for c in 0..inner {
                if !columns_ok[c] || (F == 6 && acc[5][c] > 0.5) {
                    continue;
                }
                let s = WindowSums {
                    sx: acc[0][c],
                    sy: acc[1][c],
                    sxy: acc[2][c],
                    sxx: acc[3][c],
                    syy: acc[4][c],
                };
                d[c] = resolve(&s, n, self.epsilon, fill, &mut gather, start + c);
            }
        }
    }
}
