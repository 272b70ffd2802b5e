use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slidecorr_core::Backend;

/// Sliding-window Pearson correlation maps for gridded data.
#[derive(Parser, Debug)]
#[command(name = "slidecorr", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Correlate two grids and write the correlation map.
    Correlate(CorrelateArgs),
    /// Compare backends against the brute-force reference.
    Compare(CompareArgs),
    /// Time backends on seeded random inputs.
    Bench(BenchArgs),
    /// Generate synthetic grids.
    Gen(GenArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// First input grid (SWGRID, or CSV when the name ends in .csv).
    #[arg(long)]
    pub x: PathBuf,

    /// Second input grid, same shape as --x.
    #[arg(long)]
    pub y: PathBuf,

    /// Odd window lengths, one per axis; a single value applies to every axis.
    #[arg(long, value_delimiter = ',', required = true)]
    pub window: Vec<usize>,

    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,

    /// Samples less than or equal to this value are missing.
    #[arg(long, default_value_t = -999.0, allow_negative_numbers = true)]
    pub missing_le: f64,

    /// Output value for undefined correlations.
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub fill: f64,

    /// Relative variance below which a window is treated as constant.
    #[arg(long, default_value_t = 0.0)]
    pub constant_epsilon: f64,
}

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Output path (SWGRID f64, or CSV when the name ends in .csv).
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = BackendArg::Separable)]
    pub backend: BackendArg,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Backends to check against the reference.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "separable")]
    pub backends: Vec<BackendArg>,

    /// Largest acceptable absolute difference (exclusive).
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Grid extents, e.g. 1024x1024.
    #[arg(long, value_parser = parse_extents)]
    pub size: Extents,

    /// Odd window length along every axis.
    #[arg(long, default_value_t = 7)]
    pub window: usize,

    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "naive,separable"
    )]
    pub backends: Vec<BackendArg>,

    /// Timed runs per backend; the median is reported.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub repeat: u32,

    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 1)]
    pub threads: usize,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Precision::F32)]
    pub precision: Precision,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Grid extents, e.g. 64x64.
    #[arg(long, value_parser = parse_extents)]
    pub size: Extents,

    #[arg(long, value_enum)]
    pub pattern: Pattern,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output path for the (first) grid.
    #[arg(long)]
    pub out: PathBuf,

    /// Output path for the second grid of a pair (anticorr, clouds, random).
    #[arg(long)]
    pub out2: Option<PathBuf>,

    /// Fraction of samples replaced by the missing sentinel.
    #[arg(long, default_value_t = 0.0, value_parser = parse_fraction)]
    pub missing_frac: f64,

    #[arg(long, value_enum, default_value_t = Precision::F32)]
    pub precision: Precision,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendArg {
    Naive,
    Separable,
    Cumsum,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Naive => Backend::Naive,
            BackendArg::Separable => Backend::Separable,
            BackendArg::Cumsum => Backend::Cumsum,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// Uniform noise in [0, 1).
    Random,
    /// The flat row-major index of each cell.
    Ramp,
    /// A pair with y = -x + small noise.
    Anticorr,
    /// Visible/infrared-like pair: bright cold clouds over a noisy background.
    Clouds,
}

/// Grid extents written as `AxB[xC...]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extents(pub Vec<usize>);

/// Parses `AxB[xC...]` into extents.
pub fn parse_extents(s: &str) -> Result<Extents, String> {
    let extents = s
        .split(['x', 'X'])
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid extent {p:?} in {s:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if extents.contains(&0) {
        return Err(format!("extents must be positive in {s:?}"));
    }
    Ok(Extents(extents))
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let f: f64 = s.parse().map_err(|_| format!("invalid fraction {s:?}"))?;
    if !(0.0..=1.0).contains(&f) {
        return Err(format!("fraction {f} is outside [0, 1]"));
    }
    Ok(f)
}
