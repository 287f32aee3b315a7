//! Missing-value imputation for numerical relations via individual models:
//! every complete tuple learns its own ridge regression over its nearest
//! neighbors, the neighborhood size is selected per tuple by validation,
//! and a missing cell is filled by vote-weighted aggregation of the
//! predictions its neighbors' models make for it.
//!
//! The crate also ships the classical reference imputers (column mean,
//! neighbor averaging, global and local regression) and a deterministic
//! benchmark harness, so the method's two limiting cases — neighborhood
//! size 1 behaving like plain kNN and neighborhood size n behaving like one
//! global regression — are checkable, not folklore.

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod evalbench;
pub mod impute;
pub mod learner;
pub mod neighbors;
pub mod regression;
pub mod rng;

mod par;
#[cfg(test)]
pub(crate) mod testutil;

pub use dataset::{
    group_by_pattern, load_relation, load_relation_str, relation_to_csv, split_complete,
    write_relation, CompleteRelation, MissingMarkers, MissingPattern, Relation,
};
pub use error::{Error, Result};
pub use impute::{
    impute_relation, impute_with_models, learn_models, ImputationResult, ImputeOptions,
    ImputeOutcome, WeightMode,
};
pub use learner::{
    learn_adaptive, learn_adaptive_scratch, learn_fixed, read_model_sets, write_model_sets,
    CostMatrix, EllMode, ModelSet,
};
pub use neighbors::{distance, nn, FeatureSpace, NeighborIndex, NeighborList};
pub use regression::{ridge_fit, single_neighbor_model, RegressionModel, RidgeState};
