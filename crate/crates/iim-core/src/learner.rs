//! Per-tuple model learning: fixed neighborhood size, and adaptive
//! selection of the neighborhood size by validation against the other
//! complete tuples.
//!
//! Adaptive learning walks an ascending grid of neighborhood sizes
//! {1, 1+h, 1+2h, ...}. The incremental path grows each tuple's
//! normal-equation accumulators by the h newly admitted neighbors per grid
//! step; the scratch path refits every model from its full prefix at every
//! step. Both absorb neighbors in identical list order, so they produce
//! identical models, costs and selections.

use std::fmt::Write as _;
use std::io::Write;

use crate::dataset::CompleteRelation;
use crate::error::{Error, Result};
use crate::neighbors::NeighborIndex;
use crate::par;
use crate::regression::{single_neighbor_model, RegressionModel, RidgeState};

/// How the learning-neighbor count is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllMode {
    Fixed(usize),
    Adaptive,
}

impl std::fmt::Display for EllMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EllMode::Fixed(l) => write!(f, "{l}"),
            EllMode::Adaptive => write!(f, "adaptive"),
        }
    }
}

/// Echo of the knobs a model set was learned under.
#[derive(Debug, Clone, Copy)]
pub struct LearnConfig {
    pub mode: EllMode,
    pub alpha: f64,
    pub k: usize,
    pub step_h: usize,
}

/// One regression model per complete tuple for a (features, target)
/// configuration, with the neighborhood size each model was fit over.
#[derive(Debug, Clone)]
pub struct ModelSet {
    pub f_cols: Vec<usize>,
    pub target_col: usize,
    pub models: Vec<RegressionModel>,
    pub chosen_ell: Vec<usize>,
    /// True where the validation costs were all zero and the grid median
    /// was substituted for the argmin.
    pub ell_fallback: Vec<bool>,
    pub config: LearnConfig,
}

/// Accumulated squared validation error per tuple per grid value.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    pub grid: Vec<usize>,
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    fn new(grid: Vec<usize>, n: usize) -> Self {
        let len = grid.len() * n;
        CostMatrix {
            grid,
            n,
            data: vec![0.0; len],
        }
    }

    pub fn tuples(&self) -> usize {
        self.n
    }

    pub fn cost(&self, tuple: usize, grid_idx: usize) -> f64 {
        self.data[tuple * self.grid.len() + grid_idx]
    }

    pub fn row(&self, tuple: usize) -> &[f64] {
        &self.data[tuple * self.grid.len()..(tuple + 1) * self.grid.len()]
    }

    pub fn grid_position(&self, ell: usize) -> Option<usize> {
        self.grid.iter().position(|&g| g == ell)
    }

    fn set(&mut self, tuple: usize, grid_idx: usize, value: f64) {
        self.data[tuple * self.grid.len() + grid_idx] = value;
    }
}

/// Candidate neighborhood sizes for stepping h: {1, 1+h, 1+2h, ...} up to n.
pub fn stepping_grid(n: usize, step_h: usize) -> Vec<usize> {
    (1..=n).step_by(step_h).collect()
}

fn check_inputs(r: &CompleteRelation, index: &NeighborIndex, target_col: usize) -> Result<()> {
    if index.len() != r.len() {
        return Err(Error::InvalidArgument(
            "neighbor index was built over a different relation".into(),
        ));
    }
    if index.f_cols.contains(&target_col) {
        return Err(Error::InvalidArgument(format!(
            "target column {target_col} is part of the feature set"
        )));
    }
    Ok(())
}

/// Fit one model per complete tuple over its `ell` nearest neighbors (the
/// tuple itself included). `ell = 1` is the single-neighbor constant rule.
pub fn learn_fixed(
    r: &CompleteRelation,
    index: &NeighborIndex,
    target_col: usize,
    ell: usize,
    alpha: f64,
) -> Result<ModelSet> {
    check_inputs(r, index, target_col)?;
    let n = r.len();
    if ell < 1 || ell > n {
        return Err(Error::InvalidArgument(format!(
            "learning-neighbor count {ell} outside 1..={n}"
        )));
    }
    let f_cols = index.f_cols.clone();
    let models = par::try_map_indices(n, |i| -> Result<RegressionModel> {
        if ell == 1 {
            return Ok(single_neighbor_model(r.value(i, target_col), f_cols.len()));
        }
        let (order, _) = index.neighbors(i);
        let mut state = RidgeState::new(f_cols.len());
        for &nb in &order[..ell] {
            state.absorb_tuple(r.row(nb), &f_cols, r.value(nb, target_col));
        }
        state.solve(alpha)
    })?;
    Ok(ModelSet {
        f_cols,
        target_col,
        models,
        chosen_ell: vec![ell; n],
        ell_fallback: vec![false; n],
        config: LearnConfig {
            mode: EllMode::Fixed(ell),
            alpha,
            k: 0,
            step_h: 1,
        },
    })
}

/// Per-tuple working data threaded through the grid walk.
struct TupleLearn {
    state: RidgeState,
    best_cost: f64,
    best_grid: usize,
    best_model: Option<RegressionModel>,
    saw_nonzero: bool,
    median_model: Option<RegressionModel>,
}

/// For each complete tuple j, the tuples whose models tuple j validates:
/// the first k neighbors of j with j itself excluded. Built with j
/// ascending so each validator list is ascending, which fixes the cost
/// accumulation order regardless of parallelism.
fn validator_lists(index: &NeighborIndex, k: usize) -> Vec<Vec<usize>> {
    let n = index.len();
    let mut validators: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        for i in index.validation_neighbors(j, k) {
            validators[i].push(j);
        }
    }
    validators
}

fn adaptive_core(
    r: &CompleteRelation,
    index: &NeighborIndex,
    target_col: usize,
    k: usize,
    alpha: f64,
    step_h: usize,
    incremental: bool,
) -> Result<(ModelSet, CostMatrix)> {
    check_inputs(r, index, target_col)?;
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if step_h < 1 {
        return Err(Error::InvalidArgument("stepping must be at least 1".into()));
    }
    let n = r.len();
    let f_cols = index.f_cols.clone();
    let grid = stepping_grid(n, step_h);
    let median_grid = (grid.len() - 1) / 2;
    let validators = validator_lists(index, k);
    let mut costs = CostMatrix::new(grid.clone(), n);

    let mut tuples: Vec<TupleLearn> = (0..n)
        .map(|_| TupleLearn {
            state: RidgeState::new(f_cols.len()),
            best_cost: f64::INFINITY,
            best_grid: 0,
            best_model: None,
            saw_nonzero: false,
            median_model: None,
        })
        .collect();

    let mut prev_ell = 0usize;
    for (g, &ell) in grid.iter().enumerate() {
        let column = par::try_map_mut(&mut tuples, |i, tl| -> Result<f64> {
            let (order, _) = index.neighbors(i);
            let model = if incremental {
                for &nb in &order[prev_ell..ell] {
                    tl.state
                        .absorb_tuple(r.row(nb), &f_cols, r.value(nb, target_col));
                }
                if ell == 1 {
                    single_neighbor_model(r.value(i, target_col), f_cols.len())
                } else {
                    tl.state.solve(alpha)?
                }
            } else if ell == 1 {
                single_neighbor_model(r.value(i, target_col), f_cols.len())
            } else {
                let mut state = RidgeState::new(f_cols.len());
                for &nb in &order[..ell] {
                    state.absorb_tuple(r.row(nb), &f_cols, r.value(nb, target_col));
                }
                state.solve(alpha)?
            };

            let mut cost = 0.0;
            for &j in &validators[i] {
                let err = r.value(j, target_col) - model.predict_row(r.row(j), &f_cols);
                cost += err * err;
            }
            if cost < tl.best_cost {
                tl.best_cost = cost;
                tl.best_grid = g;
                tl.best_model = Some(model.clone());
            }
            if cost != 0.0 {
                tl.saw_nonzero = true;
            }
            if g == median_grid && !tl.saw_nonzero {
                tl.median_model = Some(model);
            }
            Ok(cost)
        })?;
        for (i, c) in column.into_iter().enumerate() {
            costs.set(i, g, c);
        }
        prev_ell = ell;
    }

    let mut models = Vec::with_capacity(n);
    let mut chosen_ell = Vec::with_capacity(n);
    let mut ell_fallback = Vec::with_capacity(n);
    for tl in tuples {
        if tl.saw_nonzero {
            models.push(tl.best_model.expect("grid is never empty"));
            chosen_ell.push(grid[tl.best_grid]);
            ell_fallback.push(false);
        } else {
            models.push(
                tl.median_model
                    .expect("median model stashed for all-zero rows"),
            );
            chosen_ell.push(grid[median_grid]);
            ell_fallback.push(true);
        }
    }
    Ok((
        ModelSet {
            f_cols,
            target_col,
            models,
            chosen_ell,
            ell_fallback,
            config: LearnConfig {
                mode: EllMode::Adaptive,
                alpha,
                k,
                step_h,
            },
        },
        costs,
    ))
}

/// Adaptive learning over the stepping grid using the incremental
/// accumulator updates.
pub fn learn_adaptive(
    r: &CompleteRelation,
    index: &NeighborIndex,
    target_col: usize,
    k: usize,
    alpha: f64,
    step_h: usize,
) -> Result<(ModelSet, CostMatrix)> {
    adaptive_core(r, index, target_col, k, alpha, step_h, true)
}

/// Reference path with the same contract as [`learn_adaptive`], refitting
/// every model from scratch at every grid step.
pub fn learn_adaptive_scratch(
    r: &CompleteRelation,
    index: &NeighborIndex,
    target_col: usize,
    k: usize,
    alpha: f64,
    step_h: usize,
) -> Result<(ModelSet, CostMatrix)> {
    adaptive_core(r, index, target_col, k, alpha, step_h, false)
}

// --- model file format ---
//
// Line-oriented text, one block per model set:
//   #set target=<name> features=<name,...> mode=<fixed:N|adaptive> alpha=<a> k=<k> step=<h>
//   <tuple index> <chosen ell> <phi entries...> [ridge-fallback] [ell-fallback]
// Tuple indices refer to the complete sub-relation in original row order.

/// Serialize model sets; column references are by name so the file is
/// self-describing against its source CSV.
pub fn write_model_sets<W: Write>(
    sets: &[ModelSet],
    names: &[String],
    writer: &mut W,
) -> std::io::Result<()> {
    writeln!(writer, "#models v1")?;
    for set in sets {
        let features: Vec<&str> = set.f_cols.iter().map(|&c| names[c].as_str()).collect();
        let mode = match set.config.mode {
            EllMode::Fixed(l) => format!("fixed:{l}"),
            EllMode::Adaptive => "adaptive".to_string(),
        };
        writeln!(
            writer,
            "#set target={} features={} mode={} alpha={} k={} step={}",
            names[set.target_col],
            features.join(","),
            mode,
            set.config.alpha,
            set.config.k,
            set.config.step_h
        )?;
        for (i, model) in set.models.iter().enumerate() {
            let mut line = String::new();
            write!(line, "{} {}", i, set.chosen_ell[i]).unwrap();
            for &p in &model.phi {
                write!(line, " {p}").unwrap();
            }
            if model.fallback {
                line.push_str(" ridge-fallback");
            }
            if set.ell_fallback[i] {
                line.push_str(" ell-fallback");
            }
            writeln!(writer, "{line}")?;
        }
    }
    Ok(())
}

fn parse_kv<'a>(part: &'a str, key: &str) -> Option<&'a str> {
    part.strip_prefix(key)?.strip_prefix('=')
}

/// Parse model sets written by [`write_model_sets`], resolving column names
/// against the given header.
pub fn read_model_sets(text: &str, names: &[String]) -> Result<Vec<ModelSet>> {
    let col = |name: &str| -> Result<usize> {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::ModelFormat(format!("unknown column '{name}'")))
    };

    let mut sets: Vec<ModelSet> = Vec::new();
    let mut lines = text.lines().peekable();
    match lines.next() {
        Some(first) if first.trim() == "#models v1" => {}
        _ => return Err(Error::ModelFormat("missing '#models v1' header".into())),
    }

    let mut current: Option<ModelSet> = None;
    for raw in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#set ") {
            if let Some(set) = current.take() {
                sets.push(set);
            }
            let mut target = None;
            let mut f_cols = Vec::new();
            let mut mode = EllMode::Adaptive;
            let mut alpha = 0.0;
            let mut k = 0usize;
            let mut step_h = 1usize;
            for part in rest.split_whitespace() {
                if let Some(v) = parse_kv(part, "target") {
                    target = Some(col(v)?);
                } else if let Some(v) = parse_kv(part, "features") {
                    for name in v.split(',') {
                        f_cols.push(col(name)?);
                    }
                } else if let Some(v) = parse_kv(part, "mode") {
                    mode = if v == "adaptive" {
                        EllMode::Adaptive
                    } else if let Some(l) = v.strip_prefix("fixed:") {
                        EllMode::Fixed(
                            l.parse()
                                .map_err(|_| Error::ModelFormat(format!("bad fixed mode '{v}'")))?,
                        )
                    } else {
                        return Err(Error::ModelFormat(format!("bad mode '{v}'")));
                    };
                } else if let Some(v) = parse_kv(part, "alpha") {
                    alpha = v
                        .parse()
                        .map_err(|_| Error::ModelFormat(format!("bad alpha '{v}'")))?;
                } else if let Some(v) = parse_kv(part, "k") {
                    k = v
                        .parse()
                        .map_err(|_| Error::ModelFormat(format!("bad k '{v}'")))?;
                } else if let Some(v) = parse_kv(part, "step") {
                    step_h = v
                        .parse()
                        .map_err(|_| Error::ModelFormat(format!("bad step '{v}'")))?;
                }
            }
            let target_col =
                target.ok_or_else(|| Error::ModelFormat("set without target".into()))?;
            if f_cols.is_empty() {
                return Err(Error::ModelFormat("set without features".into()));
            }
            current = Some(ModelSet {
                f_cols,
                target_col,
                models: Vec::new(),
                chosen_ell: Vec::new(),
                ell_fallback: Vec::new(),
                config: LearnConfig {
                    mode,
                    alpha,
                    k,
                    step_h,
                },
            });
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let set = current
            .as_mut()
            .ok_or_else(|| Error::ModelFormat("model line before any #set header".into()))?;
        let phi_len = set.f_cols.len() + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 2 + phi_len {
            return Err(Error::ModelFormat(format!(
                "model line needs index, ell and {phi_len} parameters: '{line}'"
            )));
        }
        let idx: usize = tokens[0]
            .parse()
            .map_err(|_| Error::ModelFormat(format!("bad tuple index '{}'", tokens[0])))?;
        if idx != set.models.len() {
            return Err(Error::ModelFormat(format!(
                "tuple indices must be consecutive from 0, got {idx} at position {}",
                set.models.len()
            )));
        }
        let ell: usize = tokens[1]
            .parse()
            .map_err(|_| Error::ModelFormat(format!("bad ell '{}'", tokens[1])))?;
        let mut phi = Vec::with_capacity(phi_len);
        for t in &tokens[2..2 + phi_len] {
            phi.push(
                t.parse::<f64>()
                    .map_err(|_| Error::ModelFormat(format!("bad parameter '{t}'")))?,
            );
        }
        let mut ridge_fallback = false;
        let mut ell_fb = false;
        for t in &tokens[2 + phi_len..] {
            match *t {
                "ridge-fallback" => ridge_fallback = true,
                "ell-fallback" => ell_fb = true,
                other => {
                    return Err(Error::ModelFormat(format!("unknown flag '{other}'")));
                }
            }
        }
        set.models.push(RegressionModel {
            phi,
            fallback: ridge_fallback,
        });
        set.chosen_ell.push(ell);
        set.ell_fallback.push(ell_fb);
    }
    if let Some(set) = current.take() {
        sets.push(set);
    }
    if sets.is_empty() {
        return Err(Error::ModelFormat("no model sets in file".into()));
    }
    Ok(sets)
}
