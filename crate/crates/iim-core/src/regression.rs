//! Ridge-regression parameter learning on tiny dense systems, plus the
//! running normal-equation accumulators that make growing a neighborhood by
//! h tuples cost O(m^2 h) instead of a full refit.
//!
//! The design matrix carries a leading 1-column for the constant term, so a
//! parameter vector is [constant, one coefficient per feature]. The ridge
//! penalty adds alpha to the whole diagonal, constant term included.

use crate::error::{Error, Result};

/// Ridge alpha used to retry a singular system; only reachable when the
/// caller's alpha is effectively zero and the inputs are collinear.
pub const FALLBACK_ALPHA: f64 = 1e-8;

const SINGULAR_EPS: f64 = 1e-12;

/// A fitted linear model: `phi[0]` is the constant term, `phi[1 + p]` the
/// coefficient of the p-th feature. `fallback` marks models produced by the
/// singular-system ridge retry.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    pub phi: Vec<f64>,
    pub fallback: bool,
}

impl RegressionModel {
    /// Model that predicts a constant regardless of features.
    pub fn constant(value: f64, f_len: usize) -> Self {
        let mut phi = vec![0.0; f_len + 1];
        phi[0] = value;
        RegressionModel {
            phi,
            fallback: false,
        }
    }

    /// Dot product of (1, features) with the parameter vector.
    pub fn predict(&self, f_values: &[f64]) -> f64 {
        debug_assert_eq!(f_values.len() + 1, self.phi.len());
        let mut acc = self.phi[0];
        for (p, &x) in f_values.iter().enumerate() {
            acc += self.phi[1 + p] * x;
        }
        acc
    }

    /// Same prediction, reading features out of a full row through a column
    /// map. Keeps the accumulation order identical to `predict`.
    pub fn predict_row(&self, row: &[f64], f_cols: &[usize]) -> f64 {
        debug_assert_eq!(f_cols.len() + 1, self.phi.len());
        let mut acc = self.phi[0];
        for (p, &c) in f_cols.iter().enumerate() {
            acc += self.phi[1 + p] * row[c];
        }
        acc
    }
}

/// Single-neighbor special case: with only the tuple itself to learn from,
/// the model is the constant `phi[0]` = target value, all coefficients zero.
pub fn single_neighbor_model(target_value: f64, f_len: usize) -> RegressionModel {
    RegressionModel::constant(target_value, f_len)
}

/// Running accumulators U = X^T X and V = X^T Y over the tuples absorbed so
/// far. U and V depend only on the absorbed set (addition commutes), so
/// growing a neighborhood never requires revisiting earlier tuples.
#[derive(Debug, Clone)]
pub struct RidgeState {
    dim: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    row: Vec<f64>,
    count: usize,
    ops: u64,
}

impl RidgeState {
    pub fn new(f_len: usize) -> Self {
        let dim = f_len + 1;
        RidgeState {
            dim,
            u: vec![0.0; dim * dim],
            v: vec![0.0; dim],
            row: vec![0.0; dim],
            count: 0,
            ops: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Accumulator updates performed so far; lets tests check that absorbing
    /// h tuples costs the same no matter how many came before.
    pub fn op_count(&self) -> u64 {
        self.ops
    }

    /// U materialized as the full symmetric matrix, row major. Only the
    /// upper triangle is stored internally.
    pub fn u(&self) -> Vec<f64> {
        let d = self.dim;
        let mut full = self.u.clone();
        for a in 0..d {
            for b in 0..a {
                full[a * d + b] = full[b * d + a];
            }
        }
        full
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Rank-one update from the staged row in `self.row`; accumulates the
    /// upper triangle only.
    #[inline]
    fn update(&mut self, y: f64) {
        let d = self.dim;
        for a in 0..d {
            let xa = self.row[a];
            self.v[a] += xa * y;
            let urow = &mut self.u[a * d + a..a * d + d];
            let xrow = &self.row[a..d];
            for (ub, &xb) in urow.iter_mut().zip(xrow) {
                *ub += xa * xb;
            }
        }
        self.ops += (d + d * (d + 1) / 2) as u64;
        self.count += 1;
    }

    /// Absorb one tuple given its feature values and target.
    pub fn absorb_row(&mut self, f_values: &[f64], y: f64) {
        debug_assert_eq!(f_values.len() + 1, self.dim);
        self.row[0] = 1.0;
        self.row[1..].copy_from_slice(f_values);
        self.update(y);
    }

    /// Absorb one tuple reading features from a full row through a column
    /// map; arithmetic matches `absorb_row` exactly.
    pub fn absorb_tuple(&mut self, row: &[f64], f_cols: &[usize], y: f64) {
        debug_assert_eq!(f_cols.len() + 1, self.dim);
        self.row[0] = 1.0;
        for (p, &c) in f_cols.iter().enumerate() {
            self.row[1 + p] = row[c];
        }
        self.update(y);
    }

    /// Absorb a batch; the empty batch leaves the state unchanged.
    pub fn absorb<'a, I>(&mut self, batch: I)
    where
        I: IntoIterator<Item = (&'a [f64], f64)>,
    {
        for (f_values, y) in batch {
            self.absorb_row(f_values, y);
        }
    }

    /// Solve (U + alpha E) phi = V. A singular system is retried once with
    /// the fallback ridge and the result flagged; a system singular even
    /// then is a numeric error.
    pub fn solve(&self, alpha: f64) -> Result<RegressionModel> {
        if self.count == 0 {
            return Err(Error::InvalidArgument(
                "cannot solve an empty regression state".into(),
            ));
        }
        if let Some(phi) = self.try_solve(alpha) {
            return Ok(RegressionModel {
                phi,
                fallback: false,
            });
        }
        let retry = alpha.max(FALLBACK_ALPHA);
        if let Some(phi) = self.try_solve(retry) {
            return Ok(RegressionModel {
                phi,
                fallback: true,
            });
        }
        Err(Error::Numeric(format!(
            "normal equations singular for {} tuples even with ridge {retry}",
            self.count
        )))
    }

    fn try_solve(&self, alpha: f64) -> Option<Vec<f64>> {
        let d = self.dim;
        let mut a = self.u();
        for i in 0..d {
            a[i * d + i] += alpha;
        }
        let mut b = self.v.clone();
        solve_dense(&mut a, &mut b, d)
    }
}

/// Gaussian elimination with partial pivoting on a d x d system, in place.
/// Returns None when a pivot falls below the scale-aware singularity
/// threshold.
fn solve_dense(a: &mut [f64], b: &mut [f64], d: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let tiny = scale * SINGULAR_EPS;

    for col in 0..d {
        let mut pivot_row = col;
        let mut pivot_mag = a[col * d + col].abs();
        for r in col + 1..d {
            let mag = a[r * d + col].abs();
            if mag > pivot_mag {
                pivot_row = r;
                pivot_mag = mag;
            }
        }
        if pivot_mag <= tiny {
            return None;
        }
        if pivot_row != col {
            for c in 0..d {
                a.swap(col * d + c, pivot_row * d + c);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * d + col];
        for r in col + 1..d {
            let factor = a[r * d + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[r * d + col] = 0.0;
            for c in col + 1..d {
                a[r * d + c] -= factor * a[col * d + c];
            }
            b[r] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; d];
    for row in (0..d).rev() {
        let mut acc = b[row];
        for c in row + 1..d {
            acc -= a[row * d + c] * x[c];
        }
        x[row] = acc / a[row * d + row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// Fit a ridge model over at least two (features, target) tuples.
pub fn ridge_fit<'a, I>(rows: I, f_len: usize, alpha: f64) -> Result<RegressionModel>
where
    I: IntoIterator<Item = (&'a [f64], f64)>,
{
    let mut state = RidgeState::new(f_len);
    state.absorb(rows);
    if state.count() < 2 {
        return Err(Error::InvalidArgument(format!(
            "ridge fit needs at least 2 tuples, got {}; one tuple is the single-neighbor case",
            state.count()
        )));
    }
    state.solve(alpha)
}
