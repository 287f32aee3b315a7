//! Fixtures and independent oracles shared by the integration suites.
//! Each suite uses its own subset.
#![allow(dead_code)]

use iim_core::rng::Rng;
use iim_core::{load_relation_str, MissingMarkers, Relation};

/// Two-street table: eight complete tuples on two attributes plus one tuple
/// with the second attribute missing (held-back value 1.8).
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

/// Fully complete random relation with values uniform in [0, 10).
pub fn random_complete(n: usize, m: usize, seed: u64) -> Relation {
    let mut rng = Rng::seed_from(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.range_f64(0.0, 10.0)).collect())
        .collect();
    let names: Vec<String> = (0..m).map(|c| format!("c{c}")).collect();
    Relation::from_rows(names, rows).unwrap()
}

/// Random relation with a handful of incomplete tuples, each missing one
/// attribute; at least two complete tuples always remain.
pub fn random_masked(n: usize, m: usize, seed: u64) -> Relation {
    let mut rng = Rng::seed_from(seed ^ 0xD1CE);
    let rel = random_complete(n, m, seed);
    let mut values = Vec::with_capacity(n * m);
    let mut mask = vec![false; n * m];
    for r in 0..n {
        values.extend_from_slice(rel.row(r));
    }
    let max_incomplete = n.saturating_sub(2).min(1 + n / 10);
    let incomplete = if max_incomplete == 0 {
        0
    } else {
        1 + rng.below(max_incomplete as u64) as usize
    };
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    for &row in order.iter().take(incomplete) {
        let col = rng.below(m as u64) as usize;
        mask[row * m + col] = true;
    }
    Relation::new(rel.names().to_vec(), values, mask).unwrap()
}

/// Closed-form simple least squares y = b0 + b1 x; oracle independent of
/// the production solver.
pub fn ols_line(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    ((sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}
