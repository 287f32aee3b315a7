//! Interactive browser demo. A two-segment dataset lives in the page; the
//! exported operations regenerate it, impute a missing value at a chosen
//! position (returning the per-neighbor models for drawing), and run the
//! method comparison. All payloads cross the boundary as JSON strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use iim_core::baselines::{glr_model, impute_knn, impute_loess, impute_mean};
use iim_core::dataset::split_complete;
use iim_core::evalbench::{
    run_bench, two_cluster, AttributeChoice, MaskPlan, Method, TwoClusterConfig,
};
use iim_core::impute::{impute_with_models, learn_models, ImputeOptions, WeightMode};
use iim_core::learner::EllMode;
use iim_core::neighbors::FeatureSpace;
use iim_core::Relation;

#[derive(Serialize)]
struct NeighborView {
    row: usize,
    x: f64,
    y: f64,
    intercept: f64,
    slope: f64,
    ell: usize,
    candidate: f64,
    spread: f64,
    weight: f64,
}

#[derive(Serialize)]
struct BaselineView {
    mean: f64,
    knn: f64,
    glr: f64,
    loess: f64,
}

#[derive(Serialize)]
struct LineView {
    intercept: f64,
    slope: f64,
}

#[derive(Serialize)]
struct ImputeView {
    x: f64,
    value: f64,
    neighbors: Vec<NeighborView>,
    baselines: BaselineView,
    glr_line: LineView,
}

fn parse_ell(ell: i32) -> EllMode {
    if ell <= 0 {
        EllMode::Adaptive
    } else {
        EllMode::Fixed(ell as usize)
    }
}

fn options(k: usize, ell: i32, alpha: f64, vote: bool) -> ImputeOptions {
    ImputeOptions {
        k,
        ell: parse_ell(ell),
        step_h: None,
        alpha,
        weight_mode: if vote {
            WeightMode::Vote
        } else {
            WeightMode::Uniform
        },
        standardize: false,
    }
}

fn points_json(rel: &Relation) -> String {
    let pts: Vec<[f64; 2]> = (0..rel.rows())
        .map(|r| [rel.value(r, 0), rel.value(r, 1)])
        .collect();
    serde_json::to_string(&pts).expect("point list serializes")
}

fn impute_at_json(
    rel: &Relation,
    x: f64,
    k: usize,
    ell: i32,
    alpha: f64,
    vote: bool,
) -> iim_core::Result<String> {
    let opts = options(k, ell, alpha, vote);

    // append the query tuple with its second attribute missing
    let mut values = Vec::with_capacity((rel.rows() + 1) * 2);
    let mut mask = Vec::with_capacity((rel.rows() + 1) * 2);
    for r in 0..rel.rows() {
        values.extend_from_slice(rel.row(r));
        mask.extend_from_slice(&[false, false]);
    }
    values.extend_from_slice(&[x, f64::NAN]);
    mask.extend_from_slice(&[false, true]);
    let with_query = Relation::new(rel.names().to_vec(), values, mask)?;

    let sets = learn_models(&with_query, &opts)?;
    let outcome = impute_with_models(&with_query, &sets, &opts)?;
    let result = &outcome.results[0];
    let set = &sets[0];

    let (r, _) = split_complete(&with_query)?;
    let neighbors: Vec<NeighborView> = result
        .neighbors
        .iter()
        .enumerate()
        .map(|(slot, &row)| {
            // complete tuples precede the query row, so indices line up
            let model = &set.models[row];
            NeighborView {
                row,
                x: r.value(row, 0),
                y: r.value(row, 1),
                intercept: model.phi[0],
                slope: model.phi[1],
                ell: set.chosen_ell[row],
                candidate: result.candidates[slot],
                spread: result.spreads[slot],
                weight: result.weights[slot],
            }
        })
        .collect();

    let space = FeatureSpace::new(&r, vec![0], false);
    let global = glr_model(&r, &[0], 1, alpha)?;
    let view = ImputeView {
        x,
        value: result.value,
        neighbors,
        baselines: BaselineView {
            mean: impute_mean(&r, 1),
            knn: impute_knn(&r, &space, &[x], 1, k),
            glr: global.predict(&[x]),
            loess: impute_loess(&r, &space, &[0], &[x], 1, k, alpha)?,
        },
        glr_line: LineView {
            intercept: global.phi[0],
            slope: global.phi[1],
        },
    };
    Ok(serde_json::to_string(&view).expect("impute view serializes"))
}

fn bench_json(
    rel: &Relation,
    seed: u32,
    missing_rate: f64,
    k: usize,
    ell: i32,
    alpha: f64,
) -> iim_core::Result<String> {
    let plan = MaskPlan {
        seed: seed as u64,
        tuple_fraction: missing_rate,
        attribute: AttributeChoice::Fixed(1),
        cluster_size: 1,
    };
    let opts = options(k, ell, alpha, true);
    let report = run_bench(rel, &plan, &Method::ALL, &opts)?;
    Ok(report.to_json())
}

/// The dataset the page explores, regenerated on demand.
#[wasm_bindgen]
pub struct Demo {
    relation: Relation,
}

#[wasm_bindgen]
impl Demo {
    /// Fresh two-segment dataset: n points, noise sigma, seeded.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, n: u32, noise: f64) -> Demo {
        let n = (n as usize).clamp(10, 5000);
        Demo {
            relation: two_cluster(&TwoClusterConfig::new(n, noise.max(0.0), seed as u64)),
        }
    }

    /// All points as JSON `[[x, y], ...]`.
    pub fn points(&self) -> String {
        points_json(&self.relation)
    }

    /// Impute the dependent attribute at `x` and explain the answer:
    /// neighbor models, candidates, weights, plus the baseline values.
    /// `ell <= 0` selects the neighborhood size adaptively per tuple.
    pub fn impute_at(
        &self,
        x: f64,
        k: usize,
        ell: i32,
        alpha: f64,
        vote: bool,
    ) -> Result<String, JsError> {
        impute_at_json(&self.relation, x, k, ell, alpha, vote).map_err(JsError::from)
    }

    /// Mask a fraction of the data and compare all methods; returns the
    /// benchmark report document.
    pub fn bench(
        &self,
        seed: u32,
        missing_rate: f64,
        k: usize,
        ell: i32,
        alpha: f64,
    ) -> Result<String, JsError> {
        bench_json(&self.relation, seed, missing_rate, k, ell, alpha).map_err(JsError::from)
    }

    /// x-range of the current dataset as JSON `[lo, hi]`.
    pub fn x_range(&self) -> String {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.relation.rows() {
            lo = lo.min(self.relation.value(r, 0));
            hi = hi.max(self.relation.value(r, 0));
        }
        serde_json::to_string(&[lo, hi]).expect("range serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_relation() -> Relation {
        two_cluster(&TwoClusterConfig::new(80, 0.1, 7))
    }

    #[test]
    fn points_payload_lists_every_tuple() {
        let rel = demo_relation();
        let parsed: Vec<[f64; 2]> = serde_json::from_str(&points_json(&rel)).unwrap();
        assert_eq!(parsed.len(), 80);
    }

    #[test]
    fn impute_payload_is_consistent() {
        let rel = demo_relation();
        let json = impute_at_json(&rel, 4.7, 5, 0, 1e-6, true).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        let neighbors = doc["neighbors"].as_array().unwrap();
        assert_eq!(neighbors.len(), 5);
        let weight_sum: f64 = neighbors
            .iter()
            .map(|n| n["weight"].as_f64().unwrap())
            .sum();
        assert!((weight_sum - 1.0).abs() < 1e-9);
        assert!(doc["value"].is_number());
        assert!(doc["baselines"]["glr"].is_number());
        // candidates come from each neighbor's own line at x
        for n in neighbors {
            let expect = n["intercept"].as_f64().unwrap() + 4.7 * n["slope"].as_f64().unwrap();
            assert!((n["candidate"].as_f64().unwrap() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn bench_payload_has_all_methods() {
        let rel = demo_relation();
        let json = bench_json(&rel, 3, 0.1, 5, 0, 1e-6).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["methods"].as_array().unwrap().len(), 5);
    }
}
