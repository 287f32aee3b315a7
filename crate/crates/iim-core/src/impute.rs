//! Imputation of masked cells: find the k nearest complete tuples, let each
//! one's individual model propose a candidate, and combine the candidates
//! with weights from their mutual distances (close candidates vote each
//! other up, outliers get little say).

use std::collections::BTreeMap;
use std::io::Write;

use crate::dataset::{
    group_by_pattern, split_complete, CompleteRelation, MissingPattern, Relation,
};
use crate::error::{Error, Result};
use crate::learner::{learn_adaptive, learn_fixed, EllMode, ModelSet};
use crate::neighbors::{nn, FeatureSpace, NeighborIndex};
use crate::par;

/// How candidate values are aggregated. `Vote` is the inverse-spread
/// weighting; `Uniform` averages candidates equally (the premise under
/// which the method reduces to plain kNN at neighborhood size 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Vote,
    Uniform,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vote" => Ok(WeightMode::Vote),
            "uniform" => Ok(WeightMode::Uniform),
            other => Err(Error::InvalidArgument(format!(
                "unknown weight mode '{other}' (expected vote or uniform)"
            ))),
        }
    }
}

impl std::fmt::Display for WeightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightMode::Vote => write!(f, "vote"),
            WeightMode::Uniform => write!(f, "uniform"),
        }
    }
}

/// Knobs for learning and imputation.
#[derive(Debug, Clone)]
pub struct ImputeOptions {
    /// Number of imputation neighbors.
    pub k: usize,
    /// Learning-neighbor count: fixed, or selected per tuple by validation.
    pub ell: EllMode,
    /// Stepping for the adaptive grid; None picks 1 for n <= 1000 and
    /// ceil(n / 200) above.
    pub step_h: Option<usize>,
    /// Ridge regularization strength.
    pub alpha: f64,
    pub weight_mode: WeightMode,
    /// Z-score standardization for neighbor distances (never for fitting).
    pub standardize: bool,
}

impl Default for ImputeOptions {
    fn default() -> Self {
        ImputeOptions {
            k: 10,
            ell: EllMode::Adaptive,
            step_h: None,
            alpha: 1e-6,
            weight_mode: WeightMode::Vote,
            standardize: false,
        }
    }
}

/// Stepping default: exact grid at desk scale, coarser above.
pub fn auto_step(n: usize) -> usize {
    if n <= 1000 {
        1
    } else {
        n.div_ceil(200)
    }
}

impl ImputeOptions {
    pub fn effective_step(&self, n: usize) -> usize {
        self.step_h.unwrap_or_else(|| auto_step(n))
    }
}

/// Everything recorded about one imputed cell.
#[derive(Debug, Clone)]
pub struct ImputationResult {
    /// Original row index of the incomplete tuple.
    pub row: usize,
    /// Imputed attribute index.
    pub column: usize,
    pub value: f64,
    /// Imputation neighbors as original row indices, closest first.
    pub neighbors: Vec<usize>,
    /// Per-neighbor model predictions.
    pub candidates: Vec<f64>,
    /// Per-candidate distance to all other candidates.
    pub spreads: Vec<f64>,
    /// Aggregation weights; always sum to 1.
    pub weights: Vec<f64>,
}

/// Combination of a candidate list into a value, with the spreads and
/// weights that produced it.
#[derive(Debug, Clone)]
pub struct Combined {
    pub value: f64,
    pub spreads: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Predict one candidate per neighbor model at the query's feature values.
pub fn candidates(set: &ModelSet, neighbor_ids: &[usize], query_f: &[f64]) -> Vec<f64> {
    neighbor_ids
        .iter()
        .map(|&j| set.models[j].predict(query_f))
        .collect()
}

/// Aggregate candidates. Spread of candidate i is the sum of absolute
/// differences to every candidate (self term contributes zero); weights are
/// normalized inverse spreads. All-equal candidates short-circuit to the
/// common value with uniform weights, which is the limit of the weighting.
pub fn combine(cands: &[f64], mode: WeightMode) -> Combined {
    let k = cands.len();
    assert!(k >= 1, "combine needs at least one candidate");
    let spreads: Vec<f64> = cands
        .iter()
        .map(|&ci| cands.iter().map(|&cj| (ci - cj).abs()).sum())
        .collect();

    match mode {
        WeightMode::Uniform => {
            let weights = vec![1.0 / k as f64; k];
            // same expression as the plain kNN mean, so the two agree exactly
            let value = cands.iter().sum::<f64>() / k as f64;
            Combined {
                value,
                spreads,
                weights,
            }
        }
        WeightMode::Vote => {
            let max_spread = spreads.iter().cloned().fold(0.0, f64::max);
            if max_spread == 0.0 {
                return Combined {
                    value: cands[0],
                    spreads,
                    weights: vec![1.0 / k as f64; k],
                };
            }
            // weights ~ 1/spread, computed as (min spread / spread) to keep
            // every intermediate in (0, 1] regardless of how tiny a spread is
            let min_spread = spreads.iter().cloned().fold(f64::INFINITY, f64::min);
            let ratios: Vec<f64> = spreads.iter().map(|&c| min_spread / c).collect();
            let total: f64 = ratios.iter().sum();
            let weights: Vec<f64> = ratios.iter().map(|&r| r / total).collect();
            let mut value = weights.iter().zip(cands).map(|(w, c)| w * c).sum::<f64>();
            // convex combination; clamp away any last-ulp excursion
            let lo = cands.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            value = value.clamp(lo, hi);
            Combined {
                value,
                spreads,
                weights,
            }
        }
    }
}

/// Impute every missing attribute of one tuple from original complete
/// values only. `sets` maps each missing attribute to the models learned
/// for this pattern's feature set.
#[allow(clippy::too_many_arguments)]
pub fn impute_tuple(
    r: &CompleteRelation,
    space: &FeatureSpace,
    sets: &BTreeMap<usize, &ModelSet>,
    original_row: usize,
    row_values: &[f64],
    pattern: &MissingPattern,
    k: usize,
    weight_mode: WeightMode,
) -> Result<Vec<ImputationResult>> {
    if r.is_empty() {
        return Err(Error::NoCompleteTuples);
    }
    let query_f: Vec<f64> = pattern.complete.iter().map(|&c| row_values[c]).collect();
    let list = nn(r, space, &query_f, k, None);
    let mut out = Vec::with_capacity(pattern.incomplete.len());
    for &col in &pattern.incomplete {
        let set = sets.get(&col).ok_or_else(|| {
            Error::InvalidArgument(format!("no model set for target column {col}"))
        })?;
        let cands = candidates(set, &list.indices, &query_f);
        let combined = combine(&cands, weight_mode);
        out.push(ImputationResult {
            row: original_row,
            column: col,
            value: combined.value,
            neighbors: list.indices.iter().map(|&i| r.original_rows[i]).collect(),
            candidates: cands,
            spreads: combined.spreads,
            weights: combined.weights,
        });
    }
    Ok(out)
}

/// A filled copy of the input relation plus one record per imputed cell.
#[derive(Debug)]
pub struct ImputeOutcome {
    pub relation: Relation,
    pub results: Vec<ImputationResult>,
}

/// Learn the model sets every pattern in the relation needs. One set per
/// (feature set, missing attribute) pair; imputed values are never fed back
/// as learning or feature inputs.
pub fn learn_models(rel: &Relation, opts: &ImputeOptions) -> Result<Vec<ModelSet>> {
    let (r, incomplete) = split_complete(rel)?;
    let groups = group_by_pattern(rel, &incomplete);
    let step = opts.effective_step(r.len());
    let mut sets = Vec::new();
    for (pattern, rows) in &groups {
        if pattern.complete.is_empty() {
            return Err(Error::NoCompleteAttributes { row: rows[0] });
        }
        let space = FeatureSpace::new(&r, pattern.complete.clone(), opts.standardize);
        let index = NeighborIndex::build(&r, &space);
        for &target in &pattern.incomplete {
            let set = match opts.ell {
                EllMode::Fixed(ell) => learn_fixed(&r, &index, target, ell, opts.alpha)?,
                EllMode::Adaptive => {
                    learn_adaptive(&r, &index, target, opts.k, opts.alpha, step)?.0
                }
            };
            sets.push(set);
        }
    }
    Ok(sets)
}

fn find_set<'a>(
    sets: &'a [ModelSet],
    pattern: &MissingPattern,
    target: usize,
) -> Result<&'a ModelSet> {
    sets.iter()
        .find(|s| s.target_col == target && s.f_cols == pattern.complete)
        .ok_or_else(|| {
            Error::ModelFormat(format!(
                "no model set for target column {target} with features {:?}",
                pattern.complete
            ))
        })
}

/// Impute with previously learned model sets (offline learn, online impute).
pub fn impute_with_models(
    rel: &Relation,
    sets: &[ModelSet],
    opts: &ImputeOptions,
) -> Result<ImputeOutcome> {
    let (r, incomplete) = split_complete(rel)?;
    for set in sets {
        if set.models.len() != r.len() {
            return Err(Error::ModelFormat(format!(
                "model set holds {} models but the relation has {} complete tuples",
                set.models.len(),
                r.len()
            )));
        }
    }
    let groups = group_by_pattern(rel, &incomplete);
    let mut relation = rel.clone();
    let mut results: Vec<ImputationResult> = Vec::new();
    for (pattern, rows) in &groups {
        if pattern.complete.is_empty() {
            return Err(Error::NoCompleteAttributes { row: rows[0] });
        }
        let space = FeatureSpace::new(&r, pattern.complete.clone(), opts.standardize);
        let mut by_target: BTreeMap<usize, &ModelSet> = BTreeMap::new();
        for &target in &pattern.incomplete {
            by_target.insert(target, find_set(sets, pattern, target)?);
        }
        let per_row = par::try_map_indices(rows.len(), |idx| {
            let row = rows[idx];
            impute_tuple(
                &r,
                &space,
                &by_target,
                row,
                rel.row(row),
                pattern,
                opts.k,
                opts.weight_mode,
            )
        })?;
        for cell_results in per_row {
            for res in cell_results {
                relation.fill(res.row, res.column, res.value);
                results.push(res);
            }
        }
    }
    results.sort_by_key(|r| (r.row, r.column));
    Ok(ImputeOutcome { relation, results })
}

/// Learn and impute in one call. Complete cells are untouched; every masked
/// cell is filled.
pub fn impute_relation(rel: &Relation, opts: &ImputeOptions) -> Result<ImputeOutcome> {
    let sets = learn_models(rel, opts)?;
    impute_with_models(rel, &sets, opts)
}

/// Per-cell explainability rows as CSV: neighbors, candidates, spreads and
/// weights are semicolon-joined within their fields.
pub fn write_explain_csv<W: Write>(
    results: &[ImputationResult],
    names: &[String],
    writer: &mut W,
) -> std::io::Result<()> {
    writeln!(
        writer,
        "row,attribute,value,neighbors,candidates,spreads,weights"
    )?;
    let join = |vals: &[f64]| -> String {
        vals.iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(";")
    };
    for res in results {
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            res.row,
            names[res.column],
            res.value,
            res.neighbors
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            join(&res.candidates),
            join(&res.spreads),
            join(&res.weights),
        )?;
    }
    Ok(())
}
