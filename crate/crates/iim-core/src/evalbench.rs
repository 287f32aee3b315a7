//! Deterministic experiment harness: seeded value masking, the accuracy
//! metrics (RMS and the two R-squared diagnostics), method comparison runs
//! with separate learn/impute timing, and a synthetic two-segment generator
//! for hermetic accuracy tests.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::Serialize;

use crate::baselines::{glr_model, impute_knn, impute_loess, impute_mean};
use crate::dataset::{group_by_pattern, split_complete, CompleteRelation, Relation};
use crate::error::{Error, Result};
use crate::impute::{impute_with_models, learn_models, ImputeOptions};
use crate::neighbors::FeatureSpace;

/// Which attribute a masked tuple loses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeChoice {
    /// One uniformly random attribute per tuple.
    RandomPerTuple,
    /// Always the given column.
    Fixed(usize),
}

/// A reproducible masking plan: identical seeds give identical masks.
#[derive(Debug, Clone)]
pub struct MaskPlan {
    pub seed: u64,
    /// Fraction of tuples made incomplete, each losing one attribute.
    pub tuple_fraction: f64,
    pub attribute: AttributeChoice,
    /// 1 masks isolated tuples; c > 1 also masks each chosen tuple's c-1
    /// nearest neighbors, so incomplete tuples cluster together.
    pub cluster_size: usize,
}

impl MaskPlan {
    pub fn new(seed: u64, tuple_fraction: f64) -> Self {
        MaskPlan {
            seed,
            tuple_fraction,
            attribute: AttributeChoice::RandomPerTuple,
            cluster_size: 1,
        }
    }
}

/// The original values of masked cells, sorted by (row, column).
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub cells: Vec<(usize, usize, f64)>,
}

impl GroundTruth {
    /// Pair each truth value with the corresponding cell of an imputed
    /// relation.
    pub fn paired_with(&self, imputed: &Relation) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .map(|&(r, c, truth)| (truth, imputed.value(r, c)))
            .collect()
    }

    /// Restore the original relation from a masked copy.
    pub fn restore(&self, masked: &Relation) -> Relation {
        let mut rel = masked.clone();
        for &(r, c, v) in &self.cells {
            rel.fill(r, c, v);
        }
        rel
    }
}

/// Mask a fully complete relation per the plan. Exactly
/// ceil(fraction * rows) tuples lose one attribute each; the truth map
/// records the removed values.
pub fn mask(rel: &Relation, plan: &MaskPlan) -> Result<(Relation, GroundTruth)> {
    if rel.missing_cells() > 0 {
        return Err(Error::Plan(
            "masking needs a fully complete relation".into(),
        ));
    }
    if !(plan.tuple_fraction > 0.0 && plan.tuple_fraction <= 1.0) {
        return Err(Error::Plan(format!(
            "tuple fraction {} outside (0, 1]",
            plan.tuple_fraction
        )));
    }
    if plan.cluster_size < 1 {
        return Err(Error::Plan("cluster size must be at least 1".into()));
    }
    if let AttributeChoice::Fixed(col) = plan.attribute {
        if col >= rel.cols() {
            return Err(Error::Plan(format!(
                "fixed attribute {col} outside schema of {} columns",
                rel.cols()
            )));
        }
    }
    let n = rel.rows();
    let m = rel.cols();
    let n_mask = ((plan.tuple_fraction * n as f64).ceil() as usize).max(1);
    if n_mask >= n {
        return Err(Error::Plan(format!(
            "masking {n_mask} of {n} tuples would leave no complete tuples"
        )));
    }

    let mut rng = crate::rng::Rng::seed_from(plan.seed);
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(n_mask);
    let mut taken: BTreeSet<usize> = BTreeSet::new();

    if plan.cluster_size == 1 {
        // partial Fisher-Yates draw of n_mask distinct rows
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..n_mask {
            let j = i + rng.below((n - i) as u64) as usize;
            pool.swap(i, j);
            let row = pool[i];
            let col = match plan.attribute {
                AttributeChoice::RandomPerTuple => rng.below(m as u64) as usize,
                AttributeChoice::Fixed(c) => c,
            };
            chosen.push((row, col));
        }
    } else {
        // clustered: each seed tuple drags its nearest unchosen neighbors along
        while chosen.len() < n_mask {
            let mut seed_row = rng.below(n as u64) as usize;
            while taken.contains(&seed_row) {
                seed_row = rng.below(n as u64) as usize;
            }
            let col = match plan.attribute {
                AttributeChoice::RandomPerTuple => rng.below(m as u64) as usize,
                AttributeChoice::Fixed(c) => c,
            };
            // neighbors on the attributes the cluster keeps
            let f_cols: Vec<usize> = (0..m).filter(|&c| c != col).collect();
            let mut dists: Vec<(f64, usize)> = (0..n)
                .filter(|r| !taken.contains(r) && *r != seed_row)
                .map(|r| {
                    let d: f64 = f_cols
                        .iter()
                        .map(|&c| {
                            let diff = rel.value(seed_row, c) - rel.value(r, c);
                            diff * diff
                        })
                        .sum();
                    (d, r)
                })
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut group = vec![seed_row];
            group.extend(dists.iter().take(plan.cluster_size - 1).map(|&(_, r)| r));
            for row in group {
                if chosen.len() >= n_mask {
                    break;
                }
                taken.insert(row);
                chosen.push((row, col));
            }
        }
    }

    let mut masked = rel.clone();
    let mut cells: Vec<(usize, usize, f64)> = chosen
        .iter()
        .map(|&(r, c)| (r, c, rel.value(r, c)))
        .collect();
    cells.sort_by_key(|&(r, c, _)| (r, c));
    for &(r, c, _) in &cells {
        masked.mask_cell(r, c);
    }
    match split_complete(&masked) {
        Ok(_) => {}
        Err(_) => return Err(Error::Plan("masking left no complete tuples".into())),
    }
    Ok((masked, GroundTruth { cells }))
}

/// Root-mean-square error over (truth, imputed) pairs.
pub fn rms(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument(
            "rms over an empty cell map is undefined".into(),
        ));
    }
    let sum: f64 = pairs
        .iter()
        .map(|&(t, v)| {
            let d = t - v;
            d * d
        })
        .sum();
    Ok((sum / pairs.len() as f64).sqrt())
}

/// Coefficient of determination of predictions against truths, with the
/// complete relation's column means as the reference. None when the
/// reference variance is zero (constant columns).
fn r2(truth: &GroundTruth, predictions: &[f64], r: &CompleteRelation) -> Option<f64> {
    assert_eq!(truth.cells.len(), predictions.len());
    let mut col_means = vec![None; r.relation.cols()];
    let mut num = 0.0;
    let mut den = 0.0;
    for (&(_, c, t), &p) in truth.cells.iter().zip(predictions) {
        let mean = *col_means[c].get_or_insert_with(|| impute_mean(r, c));
        num += (t - p) * (t - p);
        den += (t - mean) * (t - mean);
    }
    if den == 0.0 {
        None
    } else {
        Some(1.0 - num / den)
    }
}

/// R^2 of neighbor-value suggestions: low values mean neighbors do not
/// share the truth (sparse data).
pub fn r2_sparsity(
    truth: &GroundTruth,
    knn_suggestions: &[f64],
    r: &CompleteRelation,
) -> Option<f64> {
    r2(truth, knn_suggestions, r)
}

/// R^2 of global-regression predictions: low values mean one model does
/// not fit all tuples (heterogeneous data).
pub fn r2_heterogeneity(
    truth: &GroundTruth,
    glr_predictions: &[f64],
    r: &CompleteRelation,
) -> Option<f64> {
    r2(truth, glr_predictions, r)
}

/// Methods the harness can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Iim,
    Mean,
    Knn,
    Glr,
    Loess,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Iim,
        Method::Mean,
        Method::Knn,
        Method::Glr,
        Method::Loess,
    ];
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iim" => Ok(Method::Iim),
            "mean" => Ok(Method::Mean),
            "knn" => Ok(Method::Knn),
            "glr" => Ok(Method::Glr),
            "loess" => Ok(Method::Loess),
            other => Err(Error::InvalidArgument(format!(
                "unknown method '{other}' (expected iim, mean, knn, glr or loess)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Method::Iim => "iim",
            Method::Mean => "mean",
            Method::Knn => "knn",
            Method::Glr => "glr",
            Method::Loess => "loess",
        };
        write!(f, "{name}")
    }
}

/// Impute every masked cell of a relation with one baseline method,
/// returning the filled relation and the learn/impute split of the wall
/// clock. Learning covers whatever the method can precompute from the
/// complete tuples alone.
pub fn impute_with_baseline(
    rel: &Relation,
    method: Method,
    opts: &ImputeOptions,
) -> Result<(Relation, f64, f64)> {
    let started = Instant::now();
    match method {
        Method::Iim => {
            let sets = learn_models(rel, opts)?;
            let learn_seconds = started.elapsed().as_secs_f64();
            let impute_started = Instant::now();
            let outcome = impute_with_models(rel, &sets, opts)?;
            Ok((
                outcome.relation,
                learn_seconds,
                impute_started.elapsed().as_secs_f64(),
            ))
        }
        Method::Mean | Method::Knn | Method::Glr | Method::Loess => {
            let (r, incomplete) = split_complete(rel)?;
            let groups = group_by_pattern(rel, &incomplete);
            let mut filled = rel.clone();

            // learnable parts: column means, global models per (F, target)
            let mut means: Vec<Option<f64>> = vec![None; rel.cols()];
            let mut globals = Vec::new();
            for (pattern, rows) in &groups {
                if pattern.complete.is_empty() {
                    return Err(Error::NoCompleteAttributes { row: rows[0] });
                }
                for &target in &pattern.incomplete {
                    match method {
                        Method::Mean => {
                            if means[target].is_none() {
                                means[target] = Some(impute_mean(&r, target));
                            }
                        }
                        Method::Glr => {
                            let model = glr_model(&r, &pattern.complete, target, opts.alpha)?;
                            globals.push((pattern.complete.clone(), target, model));
                        }
                        _ => {}
                    }
                }
            }
            let learn_seconds = started.elapsed().as_secs_f64();

            let impute_started = Instant::now();
            for (pattern, rows) in &groups {
                let space = FeatureSpace::new(&r, pattern.complete.clone(), opts.standardize);
                for &row in rows {
                    let query_f: Vec<f64> = pattern
                        .complete
                        .iter()
                        .map(|&c| rel.value(row, c))
                        .collect();
                    for &target in &pattern.incomplete {
                        let value = match method {
                            Method::Mean => means[target].expect("mean learned above"),
                            Method::Knn => impute_knn(&r, &space, &query_f, target, opts.k),
                            Method::Glr => {
                                let (_, _, model) = globals
                                    .iter()
                                    .find(|(f, t, _)| *t == target && f == &pattern.complete)
                                    .expect("global model learned above");
                                model.predict(&query_f)
                            }
                            Method::Loess => impute_loess(
                                &r,
                                &space,
                                &pattern.complete,
                                &query_f,
                                target,
                                opts.k,
                                opts.alpha,
                            )?,
                            Method::Iim => unreachable!(),
                        };
                        filled.fill(row, target, value);
                    }
                }
            }
            Ok((
                filled,
                learn_seconds,
                impute_started.elapsed().as_secs_f64(),
            ))
        }
    }
}

/// One comparison row.
#[derive(Debug, Clone, Serialize)]
pub struct MethodResult {
    pub method: Method,
    pub rms: f64,
    pub learn_seconds: f64,
    pub impute_seconds: f64,
}

/// Full effective configuration of a benchmark run, echoed so any report is
/// reproducible from its own header.
#[derive(Debug, Clone, Serialize)]
pub struct BenchConfig {
    pub seed: u64,
    pub tuple_fraction: f64,
    pub attribute: String,
    pub cluster_size: usize,
    pub k: usize,
    pub ell: String,
    pub step: String,
    pub alpha: f64,
    pub weight_mode: String,
    pub standardize: bool,
    pub rows: usize,
    pub cols: usize,
    pub masked_cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub r2_sparsity: Option<f64>,
    pub r2_heterogeneity: Option<f64>,
    pub methods: Vec<MethodResult>,
}

impl BenchReport {
    /// One row per method; the diagnostics repeat on every row so the CSV
    /// is self-contained.
    pub fn to_csv(&self) -> String {
        let fmt_r2 = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out =
            String::from("method,rms,learn_seconds,impute_seconds,r2_sparsity,r2_heterogeneity\n");
        for row in &self.methods {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.method,
                row.rms,
                row.learn_seconds,
                row.impute_seconds,
                fmt_r2(self.r2_sparsity),
                fmt_r2(self.r2_heterogeneity),
            ));
        }
        out
    }

    /// The structured single-document form, config included.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Mask once, run every requested method on the identical masked relation,
/// and report metrics plus timings.
pub fn run_bench(
    rel: &Relation,
    plan: &MaskPlan,
    methods: &[Method],
    opts: &ImputeOptions,
) -> Result<BenchReport> {
    let (masked, truth) = mask(rel, plan)?;
    let (r, _) = split_complete(&masked)?;

    // diagnostics with the run's own k and alpha
    let mut knn_suggestions = Vec::with_capacity(truth.cells.len());
    let mut glr_predictions = Vec::with_capacity(truth.cells.len());
    for &(row, col, _) in &truth.cells {
        let f_cols: Vec<usize> = (0..masked.cols())
            .filter(|&c| !masked.is_missing(row, c))
            .collect();
        let space = FeatureSpace::new(&r, f_cols.clone(), opts.standardize);
        let query_f: Vec<f64> = f_cols.iter().map(|&c| masked.value(row, c)).collect();
        knn_suggestions.push(impute_knn(&r, &space, &query_f, col, opts.k));
        glr_predictions.push(glr_model(&r, &f_cols, col, opts.alpha)?.predict(&query_f));
    }
    let sparsity = r2_sparsity(&truth, &knn_suggestions, &r);
    let heterogeneity = r2_heterogeneity(&truth, &glr_predictions, &r);

    let mut rows = Vec::with_capacity(methods.len());
    for &method in methods {
        let (filled, learn_seconds, impute_seconds) = impute_with_baseline(&masked, method, opts)?;
        let error = rms(&truth.paired_with(&filled))?;
        rows.push(MethodResult {
            method,
            rms: error,
            learn_seconds,
            impute_seconds,
        });
    }

    Ok(BenchReport {
        config: BenchConfig {
            seed: plan.seed,
            tuple_fraction: plan.tuple_fraction,
            attribute: match plan.attribute {
                AttributeChoice::RandomPerTuple => "random".to_string(),
                AttributeChoice::Fixed(c) => rel.name(c).to_string(),
            },
            cluster_size: plan.cluster_size,
            k: opts.k,
            ell: opts.ell.to_string(),
            step: opts
                .step_h
                .map(|h| h.to_string())
                .unwrap_or_else(|| format!("auto({})", opts.effective_step(r.len()))),
            alpha: opts.alpha,
            weight_mode: opts.weight_mode.to_string(),
            standardize: opts.standardize,
            rows: rel.rows(),
            cols: rel.cols(),
            masked_cells: truth.cells.len(),
        },
        r2_sparsity: sparsity,
        r2_heterogeneity: heterogeneity,
        methods: rows,
    })
}

/// One straight segment of the synthetic generator.
#[derive(Debug, Clone, Copy)]
pub struct SegmentSpec {
    pub slope: f64,
    pub intercept: f64,
    pub x_min: f64,
    pub x_max: f64,
}

/// Two-segment synthetic data mirroring the two-street regime: each tuple
/// sits on one of two lines with different slopes, plus Gaussian noise on
/// the dependent attribute.
#[derive(Debug, Clone)]
pub struct TwoClusterConfig {
    pub n: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub segments: [SegmentSpec; 2],
}

impl TwoClusterConfig {
    pub fn new(n: usize, noise_sigma: f64, seed: u64) -> Self {
        TwoClusterConfig {
            n,
            noise_sigma,
            seed,
            segments: [
                SegmentSpec {
                    slope: -3.0,
                    intercept: 14.0,
                    x_min: 0.0,
                    x_max: 4.5,
                },
                SegmentSpec {
                    slope: 3.0,
                    intercept: -14.5,
                    x_min: 5.0,
                    x_max: 10.0,
                },
            ],
        }
    }
}

/// Generate a complete two-column relation (A1 independent, A2 dependent)
/// from the config. Deterministic per seed.
pub fn two_cluster(cfg: &TwoClusterConfig) -> Relation {
    let mut rng = crate::rng::Rng::seed_from(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let seg = cfg.segments[i % 2];
        let x = rng.range_f64(seg.x_min, seg.x_max);
        let y = seg.slope * x + seg.intercept + cfg.noise_sigma * rng.normal();
        rows.push(vec![x, y]);
    }
    Relation::from_rows(vec!["A1", "A2"], rows).expect("generator output is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::EllMode;
    use crate::testutil::assert_close;

    fn complete_random(n: usize, m: usize, seed: u64) -> Relation {
        let mut rng = crate::rng::Rng::seed_from(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.range_f64(0.0, 10.0)).collect())
            .collect();
        let names: Vec<String> = (0..m).map(|c| format!("c{c}")).collect();
        Relation::from_rows(names, rows).unwrap()
    }

    #[test]
    fn mask_count_matches_fraction() {
        let rel = complete_random(100, 5, 1);
        let (masked, truth) = mask(&rel, &MaskPlan::new(7, 0.05)).unwrap();
        // 5% of tuples, one attribute each: 1% of all cells
        assert_eq!(truth.cells.len(), 5);
        assert_eq!(masked.missing_cells(), 5);
    }

    #[test]
    fn mask_is_deterministic() {
        let rel = complete_random(60, 4, 2);
        let plan = MaskPlan::new(99, 0.1);
        let (a, ta) = mask(&rel, &plan).unwrap();
        let (b, tb) = mask(&rel, &plan).unwrap();
        assert_eq!(ta.cells, tb.cells);
        assert!(a.same_data(&b));
    }

    #[test]
    fn mask_round_trip_restores_original() {
        let rel = complete_random(40, 3, 3);
        let (masked, truth) = mask(&rel, &MaskPlan::new(5, 0.2)).unwrap();
        // unmasked cells are untouched
        for r in 0..rel.rows() {
            for c in 0..rel.cols() {
                if !masked.is_missing(r, c) {
                    assert_eq!(masked.value(r, c).to_bits(), rel.value(r, c).to_bits());
                }
            }
        }
        assert!(truth.restore(&masked).same_data(&rel));
    }

    #[test]
    fn clustered_mask_groups_neighbors() {
        let rel = complete_random(60, 3, 11);
        let plan = MaskPlan {
            seed: 4,
            tuple_fraction: 0.15,
            attribute: AttributeChoice::Fixed(2),
            cluster_size: 3,
        };
        let (masked, truth) = mask(&rel, &plan).unwrap();
        assert_eq!(truth.cells.len(), 9);
        assert_eq!(masked.missing_cells(), 9);
        // every masked row lost exactly the fixed attribute
        for &(_, c, _) in &truth.cells {
            assert_eq!(c, 2);
        }
        // each seed tuple's two nearest (on the kept attributes) are masked:
        // check the first cluster explicitly
        let masked_rows: BTreeSet<usize> = truth.cells.iter().map(|&(r, _, _)| r).collect();
        let seed_row = truth.cells[0].0;
        let mut found_near = 0;
        let mut dists: Vec<(f64, usize)> = (0..rel.rows())
            .filter(|&r| r != seed_row)
            .map(|r| {
                let d: f64 = [0usize, 1]
                    .iter()
                    .map(|&c| {
                        let diff = rel.value(seed_row, c) - rel.value(r, c);
                        diff * diff
                    })
                    .sum();
                (d, r)
            })
            .collect();
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &(_, r) in dists.iter().take(2) {
            if masked_rows.contains(&r) {
                found_near += 1;
            }
        }
        assert!(found_near >= 1, "cluster members should be masked together");
    }

    #[test]
    fn mask_rejects_overfull_fraction() {
        let rel = complete_random(10, 3, 6);
        assert!(matches!(
            mask(&rel, &MaskPlan::new(1, 1.0)),
            Err(Error::Plan(_))
        ));
    }

    #[test]
    fn rms_examples() {
        assert_close(rms(&[(1.8, 1.194)]).unwrap(), 0.606, 1e-9);
        assert_eq!(rms(&[(2.0, 2.0), (3.0, 3.0)]).unwrap(), 0.0);
        assert_close(
            rms(&[(3.0, 0.0), (4.0, 0.0)]).unwrap(),
            (25.0f64 / 2.0).sqrt(),
            1e-12,
        );
        assert!(rms(&[]).is_err());
    }

    #[test]
    fn r2_examples() {
        let rel = complete_random(30, 2, 8);
        let (masked, truth) = mask(
            &rel,
            &MaskPlan {
                seed: 3,
                tuple_fraction: 0.2,
                attribute: AttributeChoice::Fixed(1),
                cluster_size: 1,
            },
        )
        .unwrap();
        let (r, _) = split_complete(&masked).unwrap();
        // suggestions equal to truth give 1
        let perfect: Vec<f64> = truth.cells.iter().map(|&(_, _, t)| t).collect();
        assert_close(r2_sparsity(&truth, &perfect, &r).unwrap(), 1.0, 1e-12);
        // suggestions equal to the column mean give 0
        let mean = impute_mean(&r, 1);
        let means = vec![mean; truth.cells.len()];
        assert_close(r2_sparsity(&truth, &means, &r).unwrap(), 0.0, 1e-12);
        // worse than the mean goes negative
        let bad: Vec<f64> = truth
            .cells
            .iter()
            .map(|&(_, _, t)| mean + 3.0 * (mean - t).abs().max(1.0))
            .collect();
        assert!(r2_heterogeneity(&truth, &bad, &r).unwrap() < 0.0);
    }

    #[test]
    fn r2_constant_column_is_undefined() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 5.0]).collect();
        let rel = Relation::from_rows(vec!["x", "y"], rows).unwrap();
        let plan = MaskPlan {
            seed: 1,
            tuple_fraction: 0.15,
            attribute: AttributeChoice::Fixed(1),
            cluster_size: 1,
        };
        let (masked, truth) = mask(&rel, &plan).unwrap();
        let (r, _) = split_complete(&masked).unwrap();
        let sugg = vec![5.0; truth.cells.len()];
        assert!(r2_sparsity(&truth, &sugg, &r).is_none());
    }

    #[test]
    fn bench_single_method_single_row() {
        let rel = complete_random(50, 3, 21);
        let report = run_bench(
            &rel,
            &MaskPlan::new(2, 0.1),
            &[Method::Mean],
            &ImputeOptions::default(),
        )
        .unwrap();
        assert_eq!(report.methods.len(), 1);
        assert!(report.methods[0].rms >= 0.0);
        assert_eq!(report.to_csv().lines().count(), 2);
    }

    #[test]
    fn bench_metrics_are_seed_deterministic() {
        let rel = two_cluster(&TwoClusterConfig::new(120, 0.1, 5));
        let opts = ImputeOptions {
            k: 5,
            ..Default::default()
        };
        let plan = MaskPlan {
            seed: 17,
            tuple_fraction: 0.05,
            attribute: AttributeChoice::Fixed(1),
            cluster_size: 1,
        };
        let a = run_bench(&rel, &plan, &Method::ALL, &opts).unwrap();
        let b = run_bench(&rel, &plan, &Method::ALL, &opts).unwrap();
        for (x, y) in a.methods.iter().zip(&b.methods) {
            assert_eq!(x.rms.to_bits(), y.rms.to_bits());
        }
        assert_eq!(a.r2_sparsity, b.r2_sparsity);
        assert_eq!(a.r2_heterogeneity, b.r2_heterogeneity);
    }

    #[test]
    fn bench_on_two_segments_prefers_individual_models() {
        let rel = two_cluster(&TwoClusterConfig::new(300, 0.1, 9));
        let opts = ImputeOptions {
            k: 10,
            ell: EllMode::Adaptive,
            alpha: 1e-6,
            ..Default::default()
        };
        let plan = MaskPlan {
            seed: 31,
            tuple_fraction: 0.05,
            attribute: AttributeChoice::Fixed(1),
            cluster_size: 1,
        };
        let report =
            run_bench(&rel, &plan, &[Method::Iim, Method::Knn, Method::Glr], &opts).unwrap();
        let rms_of = |m: Method| {
            report
                .methods
                .iter()
                .find(|row| row.method == m)
                .unwrap()
                .rms
        };
        assert!(rms_of(Method::Iim) < rms_of(Method::Glr));
    }

    #[test]
    fn report_json_parses_and_echoes_config() {
        let rel = complete_random(40, 3, 77);
        let report = run_bench(
            &rel,
            &MaskPlan::new(4, 0.1),
            &[Method::Mean, Method::Knn],
            &ImputeOptions::default(),
        )
        .unwrap();
        let doc: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(doc["config"]["seed"], 4);
        assert_eq!(doc["methods"].as_array().unwrap().len(), 2);
        assert_eq!(doc["config"]["k"], 10);
    }

    #[test]
    fn generator_is_deterministic_and_complete() {
        let a = two_cluster(&TwoClusterConfig::new(100, 0.2, 3));
        let b = two_cluster(&TwoClusterConfig::new(100, 0.2, 3));
        assert!(a.same_data(&b));
        assert_eq!(a.missing_cells(), 0);
        assert_eq!(a.rows(), 100);
    }
}
