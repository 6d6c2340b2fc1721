use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Denominator floor for relative differences near zero.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub max_abs_diff: f64,
    pub max_rel_diff: f64,
    /// `(row, col)` of the element with the largest relative difference.
    pub worst_index: (usize, usize),
}

impl ComparisonReport {
    pub fn is_exact(&self) -> bool {
        self.max_abs_diff == 0.0
    }
}

/// Element-wise comparison of `actual` against `reference`. The relative
/// difference divides by `max(|reference|, REL_FLOOR)`. A NaN on either side
/// counts as an infinite difference.
pub fn compare(reference: &Matrix, actual: &Matrix) -> Result<ComparisonReport> {
    if reference.rows() != actual.rows() || reference.cols() != actual.cols() {
        return Err(Error::Shape(format!(
            "cannot compare {}x{} with {}x{}",
            reference.rows(),
            reference.cols(),
            actual.rows(),
            actual.cols()
        )));
    }
    let mut report = ComparisonReport {
        max_abs_diff: 0.0,
        max_rel_diff: 0.0,
        worst_index: (0, 0),
    };
    let cols = reference.cols();
    for (idx, (&r, &a)) in reference.as_slice().iter().zip(actual.as_slice()).enumerate() {
        let (r, a) = (f64::from(r), f64::from(a));
        let abs = if r.is_nan() || a.is_nan() {
            f64::INFINITY
        } else if r == a {
            0.0
        } else {
            (r - a).abs()
        };
        let rel = abs / r.abs().max(REL_FLOOR);
        report.max_abs_diff = report.max_abs_diff.max(abs);
        if rel > report.max_rel_diff {
            report.max_rel_diff = rel;
            report.worst_index = (idx / cols, idx % cols);
        }
    }
    Ok(report)
}
