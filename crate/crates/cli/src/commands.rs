use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use slidecorr_core::{
    correlate, io, naive_correlate_map, AnyGrid, Backend, CorrelatorConfig, Grid, MissingPolicy,
    Sample, WindowSpec,
};

use crate::args::{
    BenchArgs, CompareArgs, CorrelateArgs, Format, GenArgs, InputArgs, Pattern, Precision,
};
use crate::bench::{run_bench, BenchOptions};
use crate::synth;

/// A command failure and the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag values (exit 2).
    Usage(String),
    /// Unreadable or mismatched data (exit 1).
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<slidecorr_core::Error> for CliError {
    fn from(e: slidecorr_core::Error) -> Self {
        match e {
            slidecorr_core::Error::Parameter(m) => CliError::Usage(m),
            other => CliError::Failed(other.to_string()),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn failed(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Failed(format!("{}: {e}", path.display()))
}

pub fn load_grid(path: &Path) -> CliResult<AnyGrid> {
    let file = File::open(path).map_err(|e| failed(path, e))?;
    if is_csv(path) {
        io::read_csv_2d(file)
            .map(AnyGrid::F64)
            .map_err(|e| failed(path, e))
    } else {
        io::read_grid(file).map_err(|e| failed(path, e))
    }
}

fn save_grid(path: &Path, g: &AnyGrid) -> CliResult {
    let file = File::create(path).map_err(|e| failed(path, e))?;
    let sink = BufWriter::new(file);
    let result = if is_csv(path) {
        match g {
            AnyGrid::F32(g) => io::write_csv_2d(g, sink),
            AnyGrid::F64(g) => io::write_csv_2d(g, sink),
        }
    } else {
        io::write_any_grid(g, sink)
    };
    result.map_err(|e| failed(path, e))
}

/// Window lengths must be odd; checked before any file is touched.
fn check_window_flags(lengths: &[usize]) -> CliResult {
    if lengths.is_empty() || lengths.iter().any(|&k| k == 0 || k % 2 == 0) {
        return Err(CliError::Usage(format!(
            "window lengths must be odd, got {lengths:?}"
        )));
    }
    Ok(())
}

/// Expands `--window` to one length per axis.
fn window_for(lengths: &[usize], ndim: usize) -> CliResult<WindowSpec> {
    let lengths = match lengths {
        [k] => vec![*k; ndim],
        many if many.len() == ndim => many.to_vec(),
        many => {
            return Err(CliError::Usage(format!(
                "--window gives {} lengths for {ndim}-dimensional data",
                many.len()
            )))
        }
    };
    Ok(WindowSpec::new(lengths)?)
}

fn policy_for(input: &InputArgs) -> CliResult<MissingPolicy> {
    MissingPolicy::new(input.missing_le, input.fill).map_err(|e| CliError::Usage(e.to_string()))
}

/// Both inputs in a common precision (f32 only if both are f32).
enum Pair {
    F32(Grid<f32>, Grid<f32>),
    F64(Grid<f64>, Grid<f64>),
}

impl Pair {
    fn new(x: AnyGrid, y: AnyGrid) -> CliResult<Self> {
        if x.shape() != y.shape() {
            return Err(CliError::Failed(format!(
                "both inputs must be the same size: {:?} vs {:?}",
                x.shape(),
                y.shape()
            )));
        }
        Ok(match (x, y) {
            (AnyGrid::F32(x), AnyGrid::F32(y)) => Pair::F32(x, y),
            (x, y) => Pair::F64(x.to_f64(), y.to_f64()),
        })
    }

    fn ndim(&self) -> usize {
        match self {
            Pair::F32(x, _) => x.ndim(),
            Pair::F64(x, _) => x.ndim(),
        }
    }
}

fn load_pair(input: &InputArgs) -> CliResult<(Pair, WindowSpec, MissingPolicy)> {
    check_window_flags(&input.window)?;
    let policy = policy_for(input)?;
    let pair = Pair::new(load_grid(&input.x)?, load_grid(&input.y)?)?;
    let w = window_for(&input.window, pair.ndim())?;
    Ok((pair, w, policy))
}

fn correlate_pair(
    pair: &Pair,
    w: &WindowSpec,
    p: &MissingPolicy,
    cfg: &CorrelatorConfig,
) -> CliResult<Grid<f64>> {
    let map = match pair {
        Pair::F32(x, y) => correlate(x, y, w, p, cfg)?,
        Pair::F64(x, y) => correlate(x, y, w, p, cfg)?,
    };
    Ok(map.into_grid())
}

fn config(input: &InputArgs, backend: Backend) -> CorrelatorConfig {
    CorrelatorConfig::default()
        .with_backend(backend)
        .with_threads(input.threads)
        .with_constant_epsilon(input.constant_epsilon)
}

pub fn cmd_correlate(args: &CorrelateArgs) -> CliResult {
    let t0 = Instant::now();
    let (pair, w, policy) = load_pair(&args.input)?;
    let t1 = Instant::now();
    let out = correlate_pair(
        &pair,
        &w,
        &policy,
        &config(&args.input, args.backend.into()),
    )?;
    let t2 = Instant::now();
    save_grid(&args.out, &AnyGrid::F64(out))?;
    let t3 = Instant::now();
    eprintln!("read:    {:.6} s", (t1 - t0).as_secs_f64());
    eprintln!("compute: {:.6} s", (t2 - t1).as_secs_f64());
    eprintln!("write:   {:.6} s", (t3 - t2).as_secs_f64());
    Ok(())
}

/// Difference between a candidate map and the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    /// Largest absolute difference where both maps are defined.
    pub max_abs_diff: f64,
    /// Positions that are fill in exactly one of the maps.
    pub fill_mismatches: usize,
}

pub fn discrepancy(candidate: &Grid<f64>, reference: &Grid<f64>, fill: f64) -> Discrepancy {
    let mut d = Discrepancy {
        max_abs_diff: 0.0,
        fill_mismatches: 0,
    };
    for (&a, &b) in candidate.as_slice().iter().zip(reference.as_slice()) {
        match (a == fill, b == fill) {
            (true, true) => {}
            (false, false) => d.max_abs_diff = d.max_abs_diff.max((a - b).abs()),
            _ => d.fill_mismatches += 1,
        }
    }
    d
}

/// Returns whether every backend passed.
pub fn cmd_compare(args: &CompareArgs) -> CliResult<bool> {
    let (pair, w, policy) = load_pair(&args.input)?;
    let reference = match &pair {
        Pair::F32(x, y) => naive_correlate_map(x, y, &w, &policy)?,
        Pair::F64(x, y) => naive_correlate_map(x, y, &w, &policy)?,
    };
    let mut all_pass = true;
    for &backend in &args.backends {
        let backend: Backend = backend.into();
        let out = correlate_pair(&pair, &w, &policy, &config(&args.input, backend))?;
        let d = discrepancy(&out, &reference, policy.fill_value);
        let pass = d.max_abs_diff < args.tol && d.fill_mismatches == 0;
        all_pass &= pass;
        println!(
            "{backend}: max_abs_diff={:e} fill_mismatches={} tol={:e} {}",
            d.max_abs_diff,
            d.fill_mismatches,
            args.tol,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(all_pass)
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult {
    check_window_flags(&[args.window])?;
    let opts = BenchOptions {
        shape: args.size.0.clone(),
        window: args.window,
        backends: args.backends.iter().map(|&b| b.into()).collect(),
        repeats: args.repeat as usize,
        threads: args.threads,
        seed: args.seed,
        precision: args.precision,
    };
    let report = run_bench(&opts)?;
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Failed(e.to_string()))?
        ),
    }
    Ok(())
}

fn convert(g: Grid<f64>, precision: Precision) -> AnyGrid {
    match precision {
        Precision::F32 => AnyGrid::F32(g.map(|&v| f32::from_f64(v))),
        Precision::F64 => AnyGrid::F64(g),
    }
}

pub fn cmd_gen(args: &GenArgs) -> CliResult {
    let pair_pattern = matches!(args.pattern, Pattern::Anticorr | Pattern::Clouds);
    if pair_pattern && args.out2.is_none() {
        return Err(CliError::Usage(
            "this pattern produces a pair; --out2 is required".into(),
        ));
    }
    if args.pattern == Pattern::Ramp && args.out2.is_some() {
        return Err(CliError::Usage(
            "the ramp pattern produces a single grid".into(),
        ));
    }
    let (mut x, y) = synth::generate(&args.size.0, args.pattern, args.seed, args.out2.is_some())?;
    let mut holes = synth::rng(args.seed ^ 0x5eed_0f40_15ed);
    synth::plant_missing(&mut x, args.missing_frac, &mut holes);
    save_grid(&args.out, &convert(x, args.precision))?;
    if let (Some(path), Some(mut y)) = (&args.out2, y) {
        synth::plant_missing(&mut y, args.missing_frac, &mut holes);
        save_grid(path, &convert(y, args.precision))?;
    }
    Ok(())
}

/// Flushes stdout, ignoring a closed pipe.
pub fn flush_stdout() {
    let _ = std::io::stdout().flush();
}
