//! Sliding-window Pearson correlation from separable window sums.
//!
//! The pipeline:
//!
//! 1. element-wise: x, y, xy, x², y² (and a union missing mask), in double
//!    precision;
//! 2. window sums of each along every axis, one pass per axis;
//! 3. per element: the sum-of-products form
//!    `(n Σxy − Σx Σy) / (sqrt(n Σx² − (Σx)²) · sqrt(n Σy² − (Σy)²))`.
//!
//! The separable backend fuses step 1 into the first axis pass and step 3
//! into the last one. Each stage is split across threads as planned by
//! [`plan_parallel`](crate::parallel::plan_parallel), with a barrier between
//! axis passes. Results are bitwise identical for every thread count.
//!
//! Border positions, windows touching a missing sample, and windows constant
//! in either input produce the policy's fill value.

use std::fmt;
use std::str::FromStr;

use crate::error::{param_err, Error, Result};
use crate::grid::{Grid, MissingPolicy, Sample};
use crate::moving_sum::cumsum_into;
use crate::oracle::WindowGather;
use crate::parallel::{plan_parallel, resolve_threads, run_ranges, DisjointSlice, Stage};
use crate::window::{advance, is_interior, unravel, WindowSpec};

/// Below this fraction of `n Σx²`, the variance term `n Σx² − (Σx)²` has lost
/// too many digits to cancellation; such windows are re-evaluated from their
/// samples with the two-pass formula (which also settles exact constancy).
const ILL_CONDITIONED: f64 = 1e-8;

mod fused;

/// How window sums are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Brute force: every window gathered and correlated from scratch.
    Naive,
    /// Rolling sums, one pass per axis.
    Separable,
    /// n-dimensional prefix sums with corner inclusion-exclusion.
    Cumsum,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Naive, Backend::Separable, Backend::Cumsum];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Naive => "naive",
            Backend::Separable => "separable",
            Backend::Cumsum => "cumsum",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                param_err!("unknown backend {s:?} (expected naive, separable or cumsum)")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorConfig {
    pub backend: Backend,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    /// Relative variance threshold below which a window counts as constant.
    /// Zero keeps exact-equality semantics.
    pub constant_epsilon: f64,
}

impl Default for CorrelatorConfig {
    fn default() -> Self {
        CorrelatorConfig {
            backend: Backend::Separable,
            threads: 0,
            constant_epsilon: 0.0,
        }
    }
}

impl CorrelatorConfig {
    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_constant_epsilon(mut self, epsilon: f64) -> Self {
        self.constant_epsilon = epsilon;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.constant_epsilon.is_nan() || self.constant_epsilon < 0.0 {
            return Err(param_err!(
                "constant epsilon must be non-negative, got {}",
                self.constant_epsilon
            ));
        }
        Ok(())
    }
}

/// Correlation coefficients, with `fill_value` wherever undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap {
    grid: Grid<f64>,
    fill_value: f64,
}

impl CorrelationMap {
    pub fn grid(&self) -> &Grid<f64> {
        &self.grid
    }

    pub fn into_grid(self) -> Grid<f64> {
        self.grid
    }

    pub fn fill_value(&self) -> f64 {
        self.fill_value
    }

    pub fn is_fill(&self, flat: usize) -> bool {
        self.grid.as_slice()[flat] == self.fill_value
    }

    /// Number of positions holding a defined coefficient.
    pub fn defined_count(&self) -> usize {
        self.grid
            .as_slice()
            .iter()
            .filter(|&&v| v != self.fill_value)
            .count()
    }
}

/// Window sums at one position.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WindowSums {
    pub sx: f64,
    pub sy: f64,
    pub sxy: f64,
    pub sxx: f64,
    pub syy: f64,
}

impl WindowSums {
    /// Direct sums over paired samples.
    pub fn from_samples(x: &[f64], y: &[f64]) -> Self {
        x.iter()
            .zip(y)
            .fold(WindowSums::default(), |s, (&a, &b)| WindowSums {
                sx: s.sx + a,
                sy: s.sy + b,
                sxy: s.sxy + a * b,
                sxx: s.sxx + a * a,
                syy: s.syy + b * b,
            })
    }

    #[inline(always)]
    fn variance_terms(&self, n: f64) -> (f64, f64) {
        (
            n * self.sxx - self.sx * self.sx,
            n * self.syy - self.sy * self.sy,
        )
    }
}

#[inline(always)]
fn below_epsilon(vx: f64, vy: f64, s: &WindowSums, epsilon: f64) -> bool {
    let scale = 1f64.max(s.sx * s.sx).max(s.sy * s.sy);
    vx <= epsilon * scale || vy <= epsilon * scale
}

/// Pearson correlation from window sums over `n` samples, clamped to
/// `[-1, 1]`. `None` when either variance term is at or below
/// `epsilon * max(1, Σx², Σy²)` (a degenerate window).
#[inline]
pub fn combine_sums(s: &WindowSums, n: usize, epsilon: f64) -> Option<f64> {
    let n = n as f64;
    let (vx, vy) = s.variance_terms(n);
    if below_epsilon(vx, vy, s, epsilon) {
        return None;
    }
    let c = (n * s.sxy - s.sx * s.sy) / (vx.sqrt() * vy.sqrt());
    Some(c.clamp(-1.0, 1.0))
}

fn check_inputs<T>(x: &Grid<T>, y: &Grid<T>, w: &WindowSpec, policy: &MissingPolicy) -> Result<()> {
    x.ensure_same_shape(y)?;
    w.check_fits(x.shape())?;
    policy.validate()
}

/// Fills `out` element-wise with `f(flat)`, in parallel blocks.
fn fill_elementwise(
    out: &mut [f64],
    shape: &[usize],
    threads: usize,
    f: impl Fn(usize) -> f64 + Sync,
) {
    let ranges = plan_parallel(shape, Stage::Elementwise, threads);
    let dst = DisjointSlice::new(out);
    run_ranges(&ranges, |range| {
        // SAFETY: element blocks are disjoint.
        let block = unsafe { dst.slice_mut(range.clone()) };
        for (slot, i) in block.iter_mut().zip(range) {
            *slot = f(i);
        }
    });
}

/// Sequential mean of the samples not flagged missing; 0 if none.
fn valid_mean<T: Sample>(v: &[T], policy: &MissingPolicy) -> f64 {
    let (sum, count) = v.iter().fold((0.0, 0usize), |(s, c), &a| {
        let a = a.to_f64();
        if policy.is_missing(a) {
            (s, c)
        } else {
            (s + a, c + 1)
        }
    });
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// 1 where the window centred at a position leaves the grid or covers a
/// missing sample in either input, else 0.
pub fn invalidity_mask<T: Sample>(
    x: &Grid<T>,
    y: &Grid<T>,
    w: &WindowSpec,
    policy: &MissingPolicy,
) -> Result<Grid<u8>> {
    check_inputs(x, y, w, policy)?;
    let shape = x.shape();
    let union = Grid::new(
        shape.to_vec(),
        x.as_slice()
            .iter()
            .zip(y.as_slice())
            .map(|(&a, &b)| {
                (policy.is_missing(a.to_f64()) || policy.is_missing(b.to_f64())) as u8 as f64
            })
            .collect(),
    )?;
    let counts = crate::moving_sum::separable_window_sum(&union, w)?;
    let half = w.half_widths();
    let mut idx = vec![0; shape.len()];
    let mut out = Vec::with_capacity(x.len());
    for &c in counts.as_slice() {
        out.push((!is_interior(&idx, shape, &half) || c > 0.5) as u8);
        advance(&mut idx, shape);
    }
    Grid::new(shape.to_vec(), out)
}

/// Sliding-window Pearson correlation map of `x` against `y`.
pub fn correlate<T: Sample>(
    x: &Grid<T>,
    y: &Grid<T>,
    w: &WindowSpec,
    policy: &MissingPolicy,
    cfg: &CorrelatorConfig,
) -> Result<CorrelationMap> {
    check_inputs(x, y, w, policy)?;
    cfg.validate()?;
    let threads = resolve_threads(cfg.threads);
    let out = match cfg.backend {
        Backend::Naive => correlate_naive(x, y, w, policy, threads),
        Backend::Separable => {
            fused::correlate_separable(x, y, w, policy, cfg.constant_epsilon, threads)
        }
        Backend::Cumsum => correlate_from_sums(x, y, w, policy, cfg, threads),
    };
    Ok(CorrelationMap {
        grid: Grid::new(x.shape().to_vec(), out)?,
        fill_value: policy.fill_value,
    })
}

fn correlate_naive<T: Sample>(
    x: &Grid<T>,
    y: &Grid<T>,
    w: &WindowSpec,
    policy: &MissingPolicy,
    threads: usize,
) -> Vec<f64> {
    let shape = x.shape();
    let half = w.half_widths();
    let mut out = vec![policy.fill_value; x.len()];
    let ranges = plan_parallel(shape, Stage::Elementwise, threads);
    let dst = DisjointSlice::new(&mut out);
    run_ranges(&ranges, |range| {
        let mut gather = WindowGather::new(x, y, w, *policy);
        let mut idx = vec![0; shape.len()];
        unravel(range.start, shape, &mut idx);
        // SAFETY: element blocks are disjoint.
        let block = unsafe { dst.slice_mut(range.clone()) };
        for (slot, flat) in block.iter_mut().zip(range) {
            if is_interior(&idx, shape, &half) {
                if let Some(c) = gather.correlate_at(flat) {
                    *slot = c;
                }
            }
            advance(&mut idx, shape);
        }
    });
    out
}

/// The five window sums plus the missing-sample counts.
struct SumFields {
    sx: Vec<f64>,
    sy: Vec<f64>,
    sxy: Vec<f64>,
    sxx: Vec<f64>,
    syy: Vec<f64>,
    missing: Option<Vec<f64>>,
}

/// The coefficient of one valid (interior, missing-free) window.
#[inline(always)]
fn resolve<T: Sample>(
    s: &WindowSums,
    n: usize,
    eps: f64,
    fill: f64,
    gather: &mut WindowGather<'_, T>,
    flat: usize,
) -> f64 {
    let nf = n as f64;
    let (vx, vy) = s.variance_terms(nf);
    if eps > 0.0 && below_epsilon(vx, vy, s, eps) {
        fill
    } else if vx <= ILL_CONDITIONED * nf * s.sxx || vy <= ILL_CONDITIONED * nf * s.syy {
        gather
            .correlate_at(flat)
            .map_or(fill, |c| c.clamp(-1.0, 1.0))
    } else {
        combine_sums(s, n, eps).unwrap_or(fill)
    }
}

fn correlate_from_sums<T: Sample>(
    x: &Grid<T>,
    y: &Grid<T>,
    w: &WindowSpec,
    policy: &MissingPolicy,
    cfg: &CorrelatorConfig,
    threads: usize,
) -> Vec<f64> {
    let sums = window_sums(x, y, w, policy, threads);
    let shape = x.shape();
    let half = w.half_widths();
    let n = w.sample_count();
    let fill = policy.fill_value;
    let eps = cfg.constant_epsilon;

    let mut out = vec![0.0; x.len()];
    let ranges = plan_parallel(shape, Stage::Elementwise, threads);
    let dst = DisjointSlice::new(&mut out);
    run_ranges(&ranges, |range| {
        let mut gather = WindowGather::new(x, y, w, *policy);
        let mut idx = vec![0; shape.len()];
        unravel(range.start, shape, &mut idx);
        // SAFETY: element blocks are disjoint.
        let block = unsafe { dst.slice_mut(range.clone()) };
        for (slot, i) in block.iter_mut().zip(range) {
            let valid =
                is_interior(&idx, shape, &half) && sums.missing.as_ref().is_none_or(|m| m[i] < 0.5);
            *slot = if valid {
                let s = WindowSums {
                    sx: sums.sx[i],
                    sy: sums.sy[i],
                    sxy: sums.sxy[i],
                    sxx: sums.sxx[i],
                    syy: sums.syy[i],
                };
                resolve(&s, n, eps, fill, &mut gather, i)
            } else {
                fill
            };
            advance(&mut idx, shape);
        }
    });
    out
}

struct SumContext<'a> {
    shape: &'a [usize],
    w: &'a WindowSpec,
    threads: usize,
    input: Vec<f64>,
    scratch: Vec<f64>,
    scratch2: Vec<f64>,
}

impl SumContext<'_> {
    /// Window sums of the field `f(flat)`.
    fn sum_of(&mut self, f: impl Fn(usize) -> f64 + Sync) -> Vec<f64> {
        fill_elementwise(&mut self.input, self.shape, self.threads, f);
        let mut out = vec![0.0; self.input.len()];
        cumsum_into(
            &self.input[..],
            self.shape,
            self.w,
            self.threads,
            &mut out,
            &mut self.scratch,
            &mut self.scratch2,
        );
        out
    }
}

/// Element-wise products followed by prefix-sum window sums, one quantity at
/// a time.
///
/// Missing samples are zeroed (in both inputs) before summation; positions
/// whose windows cover them are discarded through the missing counts.
/// Both inputs are shifted by the mean of their valid samples, which leaves
/// the correlation unchanged and keeps the variance terms well conditioned.
fn window_sums<T: Sample>(
    x: &Grid<T>,
    y: &Grid<T>,
    w: &WindowSpec,
    policy: &MissingPolicy,
    threads: usize,
) -> SumFields {
    let shape = x.shape();
    let xs = x.as_slice();
    let ys = y.as_slice();
    let len = xs.len();
    let any_missing = xs.iter().chain(ys).any(|v| policy.is_missing(v.to_f64()));
    let shift_x = valid_mean(xs, policy);
    let shift_y = valid_mean(ys, policy);

    let sample = |i: usize| -> Option<(f64, f64)> {
        let a = xs[i].to_f64();
        let b = ys[i].to_f64();
        if policy.is_missing(a) || policy.is_missing(b) {
            None
        } else {
            Some((a - shift_x, b - shift_y))
        }
    };

    let mut ctx = SumContext {
        shape,
        w,
        threads,
        input: vec![0.0; len],
        scratch: Vec::new(),
        scratch2: Vec::new(),
    };
    let sx = ctx.sum_of(|i| sample(i).map_or(0.0, |(a, _)| a));
    let sy = ctx.sum_of(|i| sample(i).map_or(0.0, |(_, b)| b));
    let sxy = ctx.sum_of(|i| sample(i).map_or(0.0, |(a, b)| a * b));
    let sxx = ctx.sum_of(|i| sample(i).map_or(0.0, |(a, _)| a * a));
    let syy = ctx.sum_of(|i| sample(i).map_or(0.0, |(_, b)| b * b));
    let missing = any_missing.then(|| ctx.sum_of(|i| sample(i).map_or(1.0, |_| 0.0)));
    SumFields {
        sx,
        sy,
        sxy,
        sxx,
        syy,
        missing,
    }
}
