//! Arithmetic-operation counts for the brute-force and separable
//! correlators on a 2-D grid of `rows x cols` with a square window of side
//! `n`.
//!
//! Brute force, per window: two means (2n²), mean subtraction (2n²),
//! numerator products and additions (2n²), squares and sums in the
//! denominator (4n²), one square root and one division: `10n² + 2`, times
//! `(rows - n + 1)(cols - n + 1)` windows. Asymptotically `10 n² A B`.
//!
//! Separable: `3AB` for xy/x²/y², `5 SM` for the five window sums,
//! `3AB + 2·3AB + 3AB + AB` for the per-element combination, so
//! `16AB + 5SM`, where one 2-D sliding sum costs
//! `SM = A[B + (B - n)] + B[A + (A - n)] ≈ 4AB`. Asymptotically `36AB`,
//! independent of the window size.

use crate::error::{param_err, Result};

/// Operation tallies for one problem size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpCount {
    pub naive_ops: u64,
    pub separable_ops: u64,
    pub sm_ops: u64,
    /// `naive_ops / separable_ops`.
    pub ratio: f64,
}

impl OpCount {
    pub fn evaluate(n: u64, rows: u64, cols: u64) -> Result<Self> {
        let naive_ops = ops_naive(n, rows, cols)?;
        let separable_ops = ops_separable(n, rows, cols)?;
        Ok(OpCount {
            naive_ops,
            separable_ops,
            sm_ops: sm_ops(n, rows, cols)?,
            ratio: naive_ops as f64 / separable_ops as f64,
        })
    }
}

fn check(n: u64, rows: u64, cols: u64) -> Result<()> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(param_err!("window side must be odd, got {n}"));
    }
    if n > rows.min(cols) {
        return Err(param_err!("window side {n} exceeds grid {rows}x{cols}"));
    }
    Ok(())
}

fn overflow() -> crate::Error {
    param_err!("operation count overflows 64 bits")
}

/// Exact brute-force tally `(10n² + 2)(rows - n + 1)(cols - n + 1)`.
pub fn ops_naive(n: u64, rows: u64, cols: u64) -> Result<u64> {
    check(n, rows, cols)?;
    let per_window = n
        .checked_mul(n)
        .and_then(|n2| n2.checked_mul(10))
        .and_then(|v| v.checked_add(2))
        .ok_or_else(overflow)?;
    per_window
        .checked_mul(rows - n + 1)
        .and_then(|v| v.checked_mul(cols - n + 1))
        .ok_or_else(overflow)
}

/// Cost of one 2-D sliding sum: `rows(2cols - n) + cols(2rows - n)`.
pub fn sm_ops(n: u64, rows: u64, cols: u64) -> Result<u64> {
    check(n, rows, cols)?;
    let a = rows.checked_mul(2 * cols - n).ok_or_else(overflow)?;
    let b = cols.checked_mul(2 * rows - n).ok_or_else(overflow)?;
    a.checked_add(b).ok_or_else(overflow)
}

/// `16 rows cols + 5 SM`.
pub fn ops_separable(n: u64, rows: u64, cols: u64) -> Result<u64> {
    let sm = sm_ops(n, rows, cols)?;
    rows.checked_mul(cols)
        .and_then(|ab| ab.checked_mul(16))
        .and_then(|v| v.checked_add(sm.checked_mul(5)?))
        .ok_or_else(overflow)
}

/// Predicted speedup of the separable algorithm over brute force.
pub fn predict_ratio(n: u64, rows: u64, cols: u64) -> Result<f64> {
    Ok(OpCount::evaluate(n, rows, cols)?.ratio)
}

/// The simplified brute-force count `10 n² A B`.
pub fn approx_naive(n: u64, rows: u64, cols: u64) -> f64 {
    10.0 * (n * n) as f64 * rows as f64 * cols as f64
}

/// The simplified separable count `36 A B`.
pub fn approx_separable(rows: u64, cols: u64) -> f64 {
    36.0 * rows as f64 * cols as f64
}
