//! Dense sliding-window Pearson correlation between two n-dimensional grids.
//!
//! [`correlate`] computes, for every cell, the correlation between the two
//! inputs over a window centred on that cell. Window sums of x, y, xy, x² and
//! y² are built with one rolling pass per axis, so the cost per cell does not
//! grow with the window size. [`naive_correlate_map`] is the brute-force
//! reference that gathers and correlates every window from scratch.
//!
//! ```
//! use slidecorr_core::{correlate, CorrelatorConfig, Grid, MissingPolicy, WindowSpec};
//!
//! let x = Grid::from_fn([16, 16], |i| (i as f64 * 0.7).sin()).unwrap();
//! let y = x.map(|v| -2.0 * v + 1.0);
//! let w = WindowSpec::cube(3, 2).unwrap();
//! let map = correlate(&x, &y, &w, &MissingPolicy::default(), &CorrelatorConfig::default()).unwrap();
//! assert_eq!(map.grid()[&[0, 0][..]], -2.0); // border
//! assert!((map.grid()[&[5, 5][..]] + 1.0).abs() < 1e-9);
//! ```

mod error;

pub mod correlator;
pub mod cost;
pub mod grid;
pub mod io;
pub mod moving_sum;
pub mod oracle;
pub mod parallel;
pub mod window;

pub use correlator::{
    combine_sums, correlate, invalidity_mask, Backend, CorrelationMap, CorrelatorConfig, WindowSums,
};
pub use cost::{ops_naive, ops_separable, predict_ratio, sm_ops, OpCount};
pub use error::{Error, Result};
pub use grid::{elementwise_product, missing_mask, ElementKind, Grid, MissingPolicy, Sample};
pub use io::{read_csv_2d, read_grid, write_csv_2d, write_grid, AnyGrid, GridFileHeader};
pub use moving_sum::{
    cumulative_sum_axis, moving_sum_1d, moving_sum_axis, separable_window_sum,
    window_sum_via_cumsum, AxisSum,
};
pub use oracle::{naive_correlate_map, pearson_classical};
pub use parallel::{plan_parallel, resolve_threads, Stage};
pub use window::WindowSpec;
