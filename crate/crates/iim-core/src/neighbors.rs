//! Euclidean distance and exact nearest-neighbor queries over the complete
//! relation, including full precomputed neighbor orderings.
//!
//! Search is brute force with a sort per query tuple; desk-scale relations
//! do not justify a spatial index. Distance ties break by ascending tuple
//! index so results are reproducible.

use crate::dataset::CompleteRelation;
use crate::par;

/// Distance of two tuples over the same attribute set:
/// sqrt(sum of squared differences / |F|). Symmetric, zero iff equal.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    debug_assert!(!a.is_empty());
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    (sum / a.len() as f64).sqrt()
}

/// Feature columns used for neighbor queries, with optional per-attribute
/// z-score standardization. Standardization affects distances only; model
/// fitting always sees raw values.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    pub f_cols: Vec<usize>,
    shift: Vec<f64>,
    scale: Vec<f64>,
}

impl FeatureSpace {
    pub fn new(r: &CompleteRelation, f_cols: Vec<usize>, standardize: bool) -> Self {
        let n = r.len() as f64;
        let mut shift = vec![0.0; f_cols.len()];
        let mut scale = vec![1.0; f_cols.len()];
        if standardize {
            for (p, &c) in f_cols.iter().enumerate() {
                let mean = (0..r.len()).map(|i| r.value(i, c)).sum::<f64>() / n;
                let var = (0..r.len())
                    .map(|i| {
                        let d = r.value(i, c) - mean;
                        d * d
                    })
                    .sum::<f64>()
                    / n;
                let std = var.sqrt();
                shift[p] = mean;
                scale[p] = if std > 0.0 { 1.0 / std } else { 1.0 };
            }
        }
        FeatureSpace {
            f_cols,
            shift,
            scale,
        }
    }

    /// Extract the raw F-values of a full row.
    pub fn raw_features(&self, row: &[f64]) -> Vec<f64> {
        self.f_cols.iter().map(|&c| row[c]).collect()
    }

    /// Squared scaled distance between a query (given on F, raw) and a row.
    fn squared_distance(&self, query_f: &[f64], row: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (p, &c) in self.f_cols.iter().enumerate() {
            let d = (query_f[p] - self.shift[p]) * self.scale[p]
                - (row[c] - self.shift[p]) * self.scale[p];
            sum += d * d;
        }
        sum
    }

    fn finish(&self, squared: f64) -> f64 {
        (squared / self.f_cols.len() as f64).sqrt()
    }
}

/// Result of a nearest-neighbor query: tuple indices into the complete
/// relation with matching distances, plus a flag set when fewer than the
/// requested k neighbors exist.
#[derive(Debug, Clone)]
pub struct NeighborList {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
    pub truncated: bool,
}

/// The k nearest complete tuples to a query given on F (raw values).
/// Ties break by ascending tuple index; `exclude_self` omits that tuple
/// before selection.
pub fn nn(
    r: &CompleteRelation,
    space: &FeatureSpace,
    query_f: &[f64],
    k: usize,
    exclude_self: Option<usize>,
) -> NeighborList {
    assert!(k >= 1, "k must be at least 1");
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(r.len());
    for i in 0..r.len() {
        if exclude_self == Some(i) {
            continue;
        }
        scored.push((space.squared_distance(query_f, r.row(i)), i));
    }
    scored.sort_unstable_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    let take = k.min(scored.len());
    NeighborList {
        indices: scored[..take].iter().map(|&(_, i)| i).collect(),
        distances: scored[..take]
            .iter()
            .map(|&(d, _)| space.finish(d))
            .collect(),
        truncated: take < k,
    }
}

/// Full distance-sorted neighbor orderings for every complete tuple.
///
/// The length-l prefix of tuple i's list is exactly nn(t_i, l), so the
/// neighbor sets for growing l are nested by construction. A tuple's own
/// list starts with itself (distance 0) unless the data contains an
/// identical lower-index tuple, in which case the ascending-index tie rule
/// wins.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    pub f_cols: Vec<usize>,
    order: Vec<Vec<usize>>,
    dist: Vec<Vec<f64>>,
}

impl NeighborIndex {
    pub fn build(r: &CompleteRelation, space: &FeatureSpace) -> Self {
        let n = r.len();
        let lists = par::map_indices(n, |i| {
            let query = space.raw_features(r.row(i));
            nn(r, space, &query, n, None)
        });
        let mut order = Vec::with_capacity(n);
        let mut dist = Vec::with_capacity(n);
        for list in lists {
            order.push(list.indices);
            dist.push(list.distances);
        }
        NeighborIndex {
            f_cols: space.f_cols.clone(),
            order,
            dist,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Sorted neighbor list of tuple i: (indices, distances).
    pub fn neighbors(&self, i: usize) -> (&[usize], &[f64]) {
        (&self.order[i], &self.dist[i])
    }

    /// First k neighbors of tuple j with j itself removed; used when a
    /// complete tuple plays validation target.
    pub fn validation_neighbors(&self, j: usize, k: usize) -> Vec<usize> {
        self.order[j]
            .iter()
            .copied()
            .filter(|&i| i != j)
            .take(k)
            .collect()
    }
}
