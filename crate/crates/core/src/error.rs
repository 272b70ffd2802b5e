use std::io;

/// Errors produced by grid construction, window sums, correlation and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Extents, lengths or dimensionalities that do not line up.
    #[error("shape error: {0}")]
    Shape(String),
    /// A parameter outside its valid domain (even window, bad axis, ...).
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Malformed file contents.
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! shape_err {
    ($($arg:tt)*) => { $crate::error::Error::Shape(format!($($arg)*)) };
}

macro_rules! param_err {
    ($($arg:tt)*) => { $crate::error::Error::Parameter(format!($($arg)*)) };
}

macro_rules! format_err {
    ($($arg:tt)*) => { $crate::error::Error::Format(format!($($arg)*)) };
}

pub(crate) use {format_err, param_err, shape_err};
