//! Reference imputers: column mean, neighbor-value averaging, one global
//! regression, and a local regression over the query's neighbors. They
//! share the neighbor search and solver with the main method so comparisons
//! measure the algorithms, not the plumbing.

use crate::dataset::CompleteRelation;
use crate::error::Result;
use crate::neighbors::{nn, FeatureSpace};
use crate::regression::{ridge_fit, single_neighbor_model, RegressionModel, RidgeState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Mean,
    Knn,
    Glr,
    Loess,
}

impl std::fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            BaselineKind::Mean => "mean",
            BaselineKind::Knn => "knn",
            BaselineKind::Glr => "glr",
            BaselineKind::Loess => "loess",
        };
        write!(f, "{name}")
    }
}

/// Arithmetic mean of the target column over the complete relation.
pub fn impute_mean(r: &CompleteRelation, target: usize) -> f64 {
    let n = r.len();
    let sum: f64 = (0..n).map(|i| r.value(i, target)).sum();
    sum / n as f64
}

/// Mean of the target over the query's k nearest complete tuples, summed in
/// neighbor order.
pub fn impute_knn(
    r: &CompleteRelation,
    space: &FeatureSpace,
    query_f: &[f64],
    target: usize,
    k: usize,
) -> f64 {
    let list = nn(r, space, query_f, k, None);
    let sum: f64 = list.indices.iter().map(|&i| r.value(i, target)).sum();
    sum / list.indices.len() as f64
}

/// One regression over all complete tuples, in original row order.
pub fn glr_model(
    r: &CompleteRelation,
    f_cols: &[usize],
    target: usize,
    alpha: f64,
) -> Result<RegressionModel> {
    let mut state = RidgeState::new(f_cols.len());
    for i in 0..r.len() {
        state.absorb_tuple(r.row(i), f_cols, r.value(i, target));
    }
    if state.count() == 1 {
        return Ok(single_neighbor_model(r.value(0, target), f_cols.len()));
    }
    state.solve(alpha)
}

/// Global-regression prediction at the query.
pub fn impute_glr(
    r: &CompleteRelation,
    f_cols: &[usize],
    query_f: &[f64],
    target: usize,
    alpha: f64,
) -> Result<f64> {
    Ok(glr_model(r, f_cols, target, alpha)?.predict(query_f))
}

/// Local regression: fit only over the query's k nearest neighbors, then
/// predict at the query. Unweighted within the neighborhood.
pub fn impute_loess(
    r: &CompleteRelation,
    space: &FeatureSpace,
    f_cols: &[usize],
    query_f: &[f64],
    target: usize,
    k: usize,
    alpha: f64,
) -> Result<f64> {
    let list = nn(r, space, query_f, k.max(2), None);
    if list.indices.len() == 1 {
        return Ok(r.value(list.indices[0], target));
    }
    let rows: Vec<(Vec<f64>, f64)> = list
        .indices
        .iter()
        .map(|&i| {
            (
                f_cols.iter().map(|&c| r.value(i, c)).collect(),
                r.value(i, target),
            )
        })
        .collect();
    let model = ridge_fit(
        rows.iter().map(|(f, y)| (f.as_slice(), *y)),
        f_cols.len(),
        alpha,
    )?;
    Ok(model.predict(query_f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{split_complete, Relation};
    use crate::testutil::{assert_close, figure_relation, ols_line};

    fn figure_setup() -> (CompleteRelation, FeatureSpace) {
        let (r, _) = split_complete(&figure_relation()).unwrap();
        let space = FeatureSpace::new(&r, vec![0], false);
        (r, space)
    }

    #[test]
    fn mean_of_target_column() {
        let (r, _) = figure_setup();
        assert_close(impute_mean(&r, 1), 4.35, 1e-12);
    }

    #[test]
    fn mean_degenerate_cases() {
        let rel = Relation::from_rows(vec!["a", "b"], vec![vec![1.0, 7.5]]).unwrap();
        let (r, _) = split_complete(&rel).unwrap();
        assert_eq!(impute_mean(&r, 1), 7.5);

        let rel = Relation::from_rows(
            vec!["a", "b"],
            vec![vec![1.0, 2.0], vec![2.0, 2.0], vec![3.0, 2.0]],
        )
        .unwrap();
        let (r, _) = split_complete(&rel).unwrap();
        assert_eq!(impute_mean(&r, 1), 2.0);
    }

    #[test]
    fn knn_mean_of_three_neighbors() {
        let (r, space) = figure_setup();
        let got = impute_knn(&r, &space, &[5.0], 1, 3);
        assert_close(got, (3.0 + 3.2 + 4.1) / 3.0, 1e-12);
    }

    #[test]
    fn knn_with_all_tuples_is_the_mean() {
        let (r, space) = figure_setup();
        assert_eq!(impute_knn(&r, &space, &[5.0], 1, 8), impute_mean(&r, 1));
    }

    #[test]
    fn knn_k1_is_nearest_value() {
        let (r, space) = figure_setup();
        assert_eq!(impute_knn(&r, &space, &[5.0], 1, 1), 3.0);
    }

    #[test]
    fn glr_prediction_at_query() {
        let (r, _) = figure_setup();
        let model = glr_model(&r, &[0], 1, 0.0).unwrap();
        // printed global parameters round to (4.41, -0.01)
        assert_close(model.phi[0], 4.41, 0.05);
        assert_close(model.phi[1], -0.01, 0.05);
        let pairs: Vec<(f64, f64)> = (0..8).map(|i| (r.value(i, 0), r.value(i, 1))).collect();
        let (b0, b1) = ols_line(&pairs);
        let got = impute_glr(&r, &[0], &[5.0], 1, 0.0).unwrap();
        assert_close(got, b0 + 5.0 * b1, 1e-9);
        assert_close(got, 4.36, 0.05);
    }

    #[test]
    fn glr_exact_on_collinear_data() {
        let rel = Relation::from_rows(
            vec!["x", "y"],
            vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]],
        )
        .unwrap();
        let (r, _) = split_complete(&rel).unwrap();
        let got = impute_glr(&r, &[0], &[4.0], 1, 0.0).unwrap();
        assert_close(got, 8.0, 1e-9);
    }

    #[test]
    fn loess_fits_the_neighborhood() {
        let (r, space) = figure_setup();
        let got = impute_loess(&r, &space, &[0], &[5.0], 1, 3, 0.0).unwrap();
        // direct least squares over the three neighbors (6.8,3) (2.9,3.2) (7.5,4.1)
        let (b0, b1) = ols_line(&[(6.8, 3.0), (2.9, 3.2), (7.5, 4.1)]);
        assert_close(got, b0 + 5.0 * b1, 1e-9);
    }

    #[test]
    fn loess_with_all_tuples_equals_glr() {
        let (r, space) = figure_setup();
        let loess = impute_loess(&r, &space, &[0], &[5.0], 1, 8, 0.0).unwrap();
        let glr = impute_glr(&r, &[0], &[5.0], 1, 0.0).unwrap();
        assert_close(loess, glr, 1e-9);
    }

    #[test]
    fn loess_interpolates_consistent_collinear_neighbors() {
        let rel = Relation::from_rows(
            vec!["x", "y"],
            vec![
                vec![1.0, 2.0],
                vec![2.0, 4.0],
                vec![3.0, 6.0],
                vec![50.0, 0.0],
            ],
        )
        .unwrap();
        let (r, _) = split_complete(&rel).unwrap();
        let space = FeatureSpace::new(&r, vec![0], false);
        let got = impute_loess(&r, &space, &[0], &[2.5], 1, 3, 0.0).unwrap();
        assert_close(got, 5.0, 1e-9);
    }
}
