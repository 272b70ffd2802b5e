//! Work partitioning for the multi-threaded passes.
//!
//! Element-wise stages split the flat element range into contiguous blocks;
//! axis passes split the set of 1-D lanes along that axis. Each lane or
//! element is owned by exactly one worker, and its arithmetic never depends
//! on the partition, so results do not depend on the thread count.

use std::marker::PhantomData;
use std::ops::Range;

/// Which pass of the pipeline is being partitioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Per-element work (products, final combination): contiguous blocks of
    /// the flat element range.
    Elementwise,
    /// A sliding pass along one axis: ranges of lane indices. In 2-D, axis 1
    /// lanes are rows and axis 0 lanes are columns.
    Axis(usize),
}

/// Resolves a requested thread count; 0 means all available cores.
pub fn resolve_threads(threads: usize) -> usize {
    if threads == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        threads
    }
}

/// Splits `count` units into at most `parts` contiguous ranges whose sizes
/// differ by at most one, larger ranges first.
pub fn balanced_ranges(count: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.max(1).min(count);
    if parts == 0 {
        return Vec::new();
    }
    let base = count / parts;
    let extra = count % parts;
    let mut start = 0;
    (0..parts)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Number of independent lanes for a pass along `axis`.
pub fn lane_count(shape: &[usize], axis: usize) -> usize {
    shape.iter().product::<usize>() / shape[axis]
}

/// Partitions the work of `stage` over `shape` into at most `threads`
/// disjoint, contiguous, balanced ranges covering every unit exactly once.
///
/// # Panics
///
/// Panics if `threads` is zero or an axis stage names a missing axis.
pub fn plan_parallel(shape: &[usize], stage: Stage, threads: usize) -> Vec<Range<usize>> {
    assert!(threads >= 1, "threads must be at least 1");
    let units = match stage {
        Stage::Elementwise => shape.iter().product(),
        Stage::Axis(axis) => {
            assert!(axis < shape.len(), "axis {axis} out of range for {shape:?}");
            lane_count(shape, axis)
        }
    };
    balanced_ranges(units, threads)
}

/// Runs `work` on every range, one scoped thread per range beyond the first.
pub(crate) fn run_ranges<F>(ranges: &[Range<usize>], work: F)
where
    F: Fn(Range<usize>) + Sync,
{
    match ranges {
        [] => {}
        [only] => work(only.clone()),
        [first, rest @ ..] => std::thread::scope(|s| {
            for r in rest {
                let work = &work;
                let r = r.clone();
                s.spawn(move || work(r));
            }
            work(first.clone());
        }),
    }
}

/// A mutable slice that several workers write to at provably disjoint
/// indices (distinct lanes or distinct element blocks).
#[derive(Clone, Copy)]
pub(crate) struct DisjointSlice<'a, T> {
    ptr: *mut T,
    len: usize,
    _marker: PhantomData<&'a mut [T]>,
}

unsafe impl<T: Send> Send for DisjointSlice<'_, T> {}
unsafe impl<T: Send> Sync for DisjointSlice<'_, T> {}

impl<'a, T> DisjointSlice<'a, T> {
    pub(crate) fn new(slice: &'a mut [T]) -> Self {
        DisjointSlice {
            ptr: slice.as_mut_ptr(),
            len: slice.len(),
            _marker: PhantomData,
        }
    }

    /// # Safety
    ///
    /// `range` must not overlap any range handed to another worker.
    #[inline(always)]
    pub(crate) unsafe fn slice_mut(&self, range: Range<usize>) -> &'a mut [T] {
        debug_assert!(range.start <= range.end && range.end <= self.len);
        std::slice::from_raw_parts_mut(self.ptr.add(range.start), range.len())
    }
}
