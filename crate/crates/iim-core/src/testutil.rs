//! Shared fixtures and independent oracles for unit tests.

use crate::dataset::{load_relation_str, MissingMarkers, Relation};

/// The two-street check-in table used across the unit tests: eight complete
/// observations on two attributes plus one tuple with A2 missing (its held
/// back value is 1.8).
pub fn figure_relation() -> Relation {
    let csv = "A1,A2\n\
               0,5.8\n\
               0.8,4.6\n\
               1.9,3.8\n\
               2.9,3.2\n\
               6.8,3\n\
               7.5,4.1\n\
               8.2,4.8\n\
               9,5.5\n\
               5,\n";
    load_relation_str(csv, &MissingMarkers::default()).unwrap()
}

pub fn assert_close(actual: f64, expected: f64, tol: f64) {
    assert!(
        (actual - expected).abs() <= tol,
        "expected {expected} +- {tol}, got {actual}"
    );
}

/// Closed-form simple least squares y = b0 + b1 x, used as an oracle
/// independent of the elimination-based solver.
pub fn ols_line(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    let b0 = (sxx * sy - sx * sxy) / det;
    let b1 = (n * sxy - sx * sy) / det;
    (b0, b1)
}
