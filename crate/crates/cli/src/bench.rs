//! Wall-clock comparison of correlator backends.
//!
//! Only the correlation itself is timed; input generation happens before
//! the clock starts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use slidecorr_core::{
    correlate, cost, resolve_threads, Backend, CorrelatorConfig, Grid, MissingPolicy, Result,
    Sample, WindowSpec,
};

use crate::args::Precision;
use crate::synth;

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub shape: Vec<usize>,
    /// Window length along every axis.
    pub window: usize,
    pub backends: Vec<Backend>,
    pub repeats: usize,
    pub threads: usize,
    pub seed: u64,
    pub precision: Precision,
}

#[derive(Debug, Clone, Serialize)]
pub struct BackendTiming {
    pub name: String,
    pub seconds_median: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub shape: Vec<usize>,
    pub window: Vec<usize>,
    pub threads: usize,
    pub repeats: usize,
    pub backends: Vec<BackendTiming>,
    /// Operation-count ratio naive / separable (2-D grids only).
    pub predicted_ratio: Option<f64>,
    /// Naive time divided by each other backend's time, when naive ran.
    pub measured_ratio_vs_naive: Option<BTreeMap<String, f64>>,
}

impl BenchReport {
    pub fn seconds(&self, backend: Backend) -> Option<f64> {
        self.backends
            .iter()
            .find(|b| b.name == backend.name())
            .map(|b| b.seconds_median)
    }

    pub fn to_text(&self) -> String {
        let dims = |v: &[usize]| {
            v.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("x")
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            "grid {}  window {}  threads {}  repeats {}",
            dims(&self.shape),
            dims(&self.window),
            self.threads,
            self.repeats
        );
        for b in &self.backends {
            let _ = write!(s, "{:<10} {:>12.6} s", b.name, b.seconds_median);
            if let Some(r) = self
                .measured_ratio_vs_naive
                .as_ref()
                .and_then(|m| m.get(&b.name))
            {
                let _ = write!(s, "   {r:.2}x vs naive");
            }
            s.push('\n');
        }
        if let Some(p) = self.predicted_ratio {
            let _ = writeln!(s, "predicted naive/separable operation ratio: {p:.2}");
        }
        s
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median wall time of `repeats` correlations of `x` against `y`.
pub fn time_backend<T: Sample>(
    x: &Grid<T>,
    y: &Grid<T>,
    w: &WindowSpec,
    backend: Backend,
    threads: usize,
    repeats: usize,
) -> Result<f64> {
    let cfg = CorrelatorConfig::default()
        .with_backend(backend)
        .with_threads(threads);
    let policy = MissingPolicy::default();
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let map = correlate(x, y, w, &policy, &cfg)?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(map);
    }
    Ok(median(&mut times))
}

pub fn run_bench(opts: &BenchOptions) -> Result<BenchReport> {
    let w = WindowSpec::cube(opts.window, opts.shape.len())?;
    w.check_fits(&opts.shape)?;
    let mut rng = synth::rng(opts.seed);
    let x = synth::uniform(&opts.shape, &mut rng)?;
    let y = synth::uniform(&opts.shape, &mut rng)?;
    let threads = resolve_threads(opts.threads);

    let mut timings = Vec::new();
    for &backend in &opts.backends {
        let seconds = match opts.precision {
            Precision::F32 => {
                let (x, y) = (x.map(|&v| v as f32), y.map(|&v| v as f32));
                time_backend(&x, &y, &w, backend, threads, opts.repeats)?
            }
            Precision::F64 => time_backend(&x, &y, &w, backend, threads, opts.repeats)?,
        };
        timings.push(BackendTiming {
            name: backend.name().to_string(),
            seconds_median: seconds,
        });
    }

    let predicted_ratio = match opts.shape[..] {
        [rows, cols] => cost::predict_ratio(opts.window as u64, rows as u64, cols as u64).ok(),
        _ => None,
    };
    let naive = timings
        .iter()
        .find(|t| t.name == Backend::Naive.name())
        .map(|t| t.seconds_median);
    let measured_ratio_vs_naive = naive.map(|naive| {
        timings
            .iter()
            .filter(|t| t.name != Backend::Naive.name())
            .map(|t| (t.name.clone(), naive / t.seconds_median))
            .collect()
    });

    Ok(BenchReport {
        shape: opts.shape.clone(),
        window: w.lengths().to_vec(),
        threads,
        repeats: opts.repeats,
        backends: timings,
        predicted_ratio,
        measured_ratio_vs_naive,
    })
}
