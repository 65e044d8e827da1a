//! Branch-and-bound over binary variables.
//!
//! Open nodes are kept in a best-bound priority queue (ties by creation
//! order). A node is evaluated by re-solving the LP relaxation with its
//! branching fixings, warm-started from the parent's LP state when one was
//! kept. Branching picks the most fractional binary, lowest index on ties.
//! A fractional diving heuristic runs at the root and periodically to find
//! incumbents early; a caller-supplied start is repaired and used as the
//! first incumbent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use super::engine::{DenseEngine, HybridEngine, LpEngine, LpOutcome, SparseEngine};
use super::lp::LpData;
use super::simplex::SimplexOptions;
use crate::milp::{MilpModel, ModelError, VarKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Warm-started sparse simplex with a dense fallback on failure.
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolveOptions {
    /// Relative gap at which the search stops.
    pub mip_gap: f64,
    /// Wall-clock budget in seconds.
    pub time_limit: Option<f64>,
    /// Budget on evaluated nodes; a deterministic alternative to `time_limit`.
    pub node_limit: Option<usize>,
    /// Seed for heuristic tie-breaking.
    pub seed: u64,
    pub feasibility_tol: f64,
    pub integrality_tol: f64,
    /// Nodes evaluated concurrently per round. Results are deterministic for a
    /// fixed worker count.
    pub workers: usize,
    pub backend: Backend,
    /// Hard cap on model variables.
    pub max_variables: usize,
    /// Run the diving heuristic every this many nodes (0 disables it).
    pub dive_every: usize,
    /// Open nodes that keep their parent's LP state for warm starts.
    pub max_warm_states: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mip_gap: 1e-4,
            time_limit: None,
            node_limit: None,
            seed: 0,
            feasibility_tol: 1e-6,
            integrality_tol: 1e-6,
            workers: 1,
            backend: Backend::Auto,
            max_variables: 2_000_000,
            dive_every: 64,
            max_warm_states: 256,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Search tree exhausted.
    Optimal,
    /// Stopped early with the gap at or below `mip_gap`.
    GapReached,
    TimeLimit,
    NodeLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    /// Best proven lower bound.
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub backend: &'static str,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("model is infeasible")]
    Infeasible,
    #[error("model has {vars} variables, above the cap of {cap}")]
    ModelTooLarge { vars: usize, cap: usize },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("search stopped ({0:?}) before any feasible point was found")]
    NoIncumbent(SolveStatus),
    #[error("LP backend failed at the root relaxation")]
    LpFailure,
}

pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    ((objective - bound) / objective.abs().max(1e-10)).max(0.0)
}

struct Node<S> {
    id: usize,
    bound: f64,
    depth: usize,
    fixes: Arc<Vec<(usize, f64)>>,
    /// Parent LP state and the single fixing that distinguishes this node.
    warm: Option<(Arc<S>, (usize, f64))>,
}

impl<S> PartialEq for Node<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S> Eq for Node<S> {}
impl<S> PartialOrd for Node<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S> Ord for Node<S> {
    // BinaryHeap is a max-heap: smaller bound, then smaller id, pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a, E: LpEngine> {
    model: &'a MilpModel,
    engine: &'a E,
    opts: &'a SolveOptions,
    binaries: Vec<usize>,
    started: Instant,
    incumbent: Option<(f64, Vec<f64>)>,
}

enum Eval<S> {
    Pruned,
    Infeasible,
    Integral { x: Vec<f64> },
    Branch { x: Vec<f64>, objective: f64, state: S, var: usize },
}

impl<'a, E: LpEngine> Search<'a, E> {
    fn timed_out(&self) -> bool {
        self.opts
            .time_limit
            .is_some_and(|t| self.started.elapsed() >= Duration::from_secs_f64(t))
    }

    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((obj, _)) => obj - (self.opts.mip_gap * obj.abs()).max(1e-9 * (1.0 + obj.abs())),
            None => f64::INFINITY,
        }
    }

    fn fractional(&self, x: &[f64]) -> Vec<usize> {
        self.binaries
            .iter()
            .copied()
            .filter(|&j| (x[j] - x[j].round()).abs() > self.opts.integrality_tol)
            .collect()
    }

    /// Most fractional binary, lowest index on ties.
    fn branch_var(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in self.fractional(x) {
            let score = (x[j] - 0.5).abs();
            if best.is_none_or(|(_, s)| score < s - 1e-12) {
                best = Some((j, score));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Turns an integral LP point into a verified incumbent candidate.
    fn candidate(&self, x: &[f64], state: Option<&E::State>) -> Option<(Vec<f64>, f64)> {
        let mut y = x.to_vec();
        for &j in &self.binaries {
            y[j] = y[j].round();
        }
        if self.model.max_violation(&y) <= self.opts.feasibility_tol {
            let obj = self.model.objective_value(&y);
            return Some((y, obj));
        }
        // Clean up by re-solving with every binary fixed.
        let fixes: Vec<(usize, f64)> = self.binaries.iter().map(|&j| (j, y[j])).collect();
        match self.engine.solve(state, &fixes) {
            LpOutcome::Optimal { x, .. } => {
                let mut z = x;
                for &j in &self.binaries {
                    z[j] = z[j].round();
                }
                (self.model.max_violation(&z) <= self.opts.feasibility_tol).then(|| {
                    let obj = self.model.objective_value(&z);
                    (z, obj)
                })
            }
            _ => None,
        }
    }

    fn offer(&mut self, x: Vec<f64>, objective: f64) -> bool {
        let better = self.incumbent.as_ref().is_none_or(|(o, _)| objective < o - 1e-12);
        if better {
            log::debug!("incumbent {objective:.6} after {:.2}s", self.started.elapsed().as_secs_f64());
            self.incumbent = Some((objective, x));
        }
        better
    }

    fn evaluate(&self, node: &Node<E::State>, cutoff: f64) -> Eval<E::State> {
        let outcome = match &node.warm {
            Some((state, fix)) => self.engine.solve(Some(state), std::slice::from_ref(fix)),
            None => self.engine.solve(None, &node.fixes),
        };
        match outcome {
            LpOutcome::Optimal { x, objective, state } => {
                if objective >= cutoff {
                    return Eval::Pruned;
                }
                match self.branch_var(&x) {
                    None => Eval::Integral { x },
                    Some(var) => Eval::Branch {
                        x,
                        objective,
                        state,
                        var,
                    },
                }
            }
            LpOutcome::Infeasible | LpOutcome::Failed => Eval::Infeasible,
        }
    }

    /// Fractional diving from an LP point. Rounds the least fractional
    /// binaries in batches (towards `guide` when given), halving the batch
    /// on infeasibility.
    fn dive(&self, mut state: Option<E::State>, mut x: Vec<f64>, guide: Option<&[f64]>) -> Option<(Vec<f64>, f64)> {
        let cutoff = self.cutoff();
        let salt = self.opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut failures = 0;
        loop {
            if self.timed_out() {
                return None;
            }
            let frac = self.fractional(&x);
            if frac.is_empty() {
                return self.candidate(&x, state.as_ref());
            }
            let target = |j: usize| match guide {
                Some(g) => g[j].round(),
                None => x[j].round(),
            };
            let mut order: Vec<(f64, u64, usize)> = frac
                .iter()
                .map(|&j| {
                    let tie = (j as u64 ^ salt).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                    ((x[j] - target(j)).abs(), tie, j)
                })
                .collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut batch = frac.len().div_ceil(4);
            loop {
                let fixes: Vec<(usize, f64)> = order[..batch].iter().map(|&(_, _, j)| (j, target(j))).collect();
                match self.engine.solve(state.as_ref(), &fixes) {
                    LpOutcome::Optimal {
                        x: nx,
                        objective,
                        state: ns,
                    } => {
                        if objective >= cutoff {
                            return None;
                        }
                        x = nx;
                        state = Some(ns);
                        break;
                    }
                    _ if batch > 1 => batch /= 2,
                    _ => {
                        let (_, _, j) = order[0];
                        let flipped = [(j, 1.0 - target(j))];
                        match self.engine.solve(state.as_ref(), &flipped) {
                            LpOutcome::Optimal {
                                x: nx,
                                objective,
                                state: ns,
                            } if objective < cutoff => {
                                x = nx;
                                state = Some(ns);
                                failures += 1;
                                if failures > 64 {
                                    return None;
                                }
                                break;
                            }
                            _ => return None,
                        }
                    }
                }
            }
        }
    }

    /// Polishes a start: fix its binaries, re-optimise the continuous part.
    fn repair_start(&self, start: &[f64]) -> Option<(Vec<f64>, f64)> {
        if start.len() != self.model.num_vars() {
            return None;
        }
        let fixes: Vec<(usize, f64)> = self.binaries.iter().map(|&j| (j, start[j].round())).collect();
        match self.engine.solve(None, &fixes) {
            LpOutcome::Optimal { x, .. } => self.candidate(&x, None),
            _ => {
                let obj = self.model.objective_value(start);
                (self.model.max_violation(start) <= self.opts.feasibility_tol).then(|| (start.to_vec(), obj))
            }
        }
    }
}

/// Solves a model with branch-and-bound.
pub fn solve(model: &MilpModel, opts: &SolveOptions) -> Result<Solution, SolveError> {
    solve_with_start(model, opts, None)
}

/// Solves a model, seeding the search with an optional full assignment.
pub fn solve_with_start(model: &MilpModel, opts: &SolveOptions, start: Option<&[f64]>) -> Result<Solution, SolveError> {
    if model.num_vars() > opts.max_variables {
        return Err(SolveError::ModelTooLarge {
            vars: model.num_vars(),
            cap: opts.max_variables,
        });
    }
    if !(opts.mip_gap >= 0.0) || opts.time_limit.is_some_and(|t| !(t > 0.0)) || opts.workers == 0 {
        return Err(SolveError::InvalidOptions(
            "mip_gap must be >= 0, time_limit > 0 and workers >= 1".into(),
        ));
    }
    model.validate()?;
    let lp = LpData::relaxation(model);
    match opts.backend {
        Backend::Dense => run(model, &DenseEngine::new(lp, SimplexOptions::default()), opts, start),
        Backend::Sparse => run(model, &SparseEngine::new(&lp), opts, start),
        Backend::Auto => run(model, &HybridEngine::new(lp, SimplexOptions::default()), opts, start),
    }
}

fn run<E: LpEngine>(
    model: &MilpModel,
    engine: &E,
    opts: &SolveOptions,
    start: Option<&[f64]>,
) -> Result<Solution, SolveError> {
    let binaries: Vec<usize> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let mut search = Search {
        model,
        engine,
        opts,
        binaries,
        started: Instant::now(),
        incumbent: None,
    };
    let finish = |search: &Search<E>, status: SolveStatus, bound: f64, nodes: usize| match &search.incumbent {
        Some((obj, x)) => {
            let bound = bound.min(*obj);
            Ok(Solution {
                status,
                objective: *obj,
                x: x.clone(),
                bound,
                gap: relative_gap(*obj, bound),
                nodes,
                backend: engine.name(),
            })
        }
        None => Err(SolveError::NoIncumbent(status)),
    };

    let (root_x, root_obj, root_state) = match engine.solve(None, &[]) {
        LpOutcome::Optimal { x, objective, state } => (x, objective, state),
        LpOutcome::Infeasible => return Err(SolveError::Infeasible),
        LpOutcome::Failed => return Err(SolveError::LpFailure),
    };
    if let Some(s) = start {
        if let Some((x, obj)) = search.repair_start(s) {
            search.offer(x, obj);
        }
    }
    let root_state = Arc::new(root_state);
    if opts.dive_every > 0 && !search.fractional(&root_x).is_empty() {
        let guide = search.incumbent.as_ref().map(|(_, x)| x.clone());
        if let Some((x, obj)) = search.dive(Some((*root_state).clone()), root_x.clone(), guide.as_deref()) {
            search.offer(x, obj);
        }
        if guide.is_some() {
            if let Some((x, obj)) = search.dive(Some((*root_state).clone()), root_x.clone(), None) {
                search.offer(x, obj);
            }
        }
    }

    let mut heap: BinaryHeap<Node<E::State>> = BinaryHeap::new();
    let mut next_id = 0;
    let mut nodes = 0usize;
    let mut warm_budget = opts.max_warm_states;
    match search.branch_var(&root_x) {
        None => {
            if let Some((x, obj)) = search.candidate(&root_x, Some(&root_state)) {
                search.offer(x, obj);
            }
            return finish(&search, SolveStatus::Optimal, root_obj, 1);
        }
        Some(var) => {
            for value in [0.0, 1.0] {
                let warm = if warm_budget > 0 {
                    warm_budget -= 1;
                    Some((Arc::clone(&root_state), (var, value)))
                } else {
                    None
                };
                heap.push(Node {
                    id: next_id,
                    bound: root_obj,
                    depth: 1,
                    fixes: Arc::new(vec![(var, value)]),
                    warm,
                });
                next_id += 1;
            }
        }
    }

    let mut since_dive = 0usize;
    loop {
        let global_bound = heap.peek().map_or(f64::INFINITY, |n| n.bound);
        if let Some((obj, _)) = &search.incumbent {
            if heap.is_empty() {
                return finish(&search, SolveStatus::Optimal, *obj, nodes);
            }
            if opts.mip_gap > 0.0 && relative_gap(*obj, global_bound) <= opts.mip_gap {
                return finish(&search, SolveStatus::GapReached, global_bound, nodes);
            }
        } else if heap.is_empty() {
            return Err(SolveError::Infeasible);
        }
        if search.timed_out() {
            return finish(&search, SolveStatus::TimeLimit, global_bound, nodes);
        }
        if opts.node_limit.is_some_and(|l| nodes >= l) {
            return finish(&search, SolveStatus::NodeLimit, global_bound, nodes);
        }

        let cutoff = search.cutoff();
        let mut batch = Vec::with_capacity(opts.workers);
        while batch.len() < opts.workers {
            match heap.pop() {
                Some(n) if n.bound >= cutoff => {
                    if let Some((_, _)) = n.warm {
                        warm_budget += 1;
                    }
                }
                Some(n) => batch.push(n),
                None => break,
            }
        }
        if batch.is_empty() {
            continue;
        }
        let results: Vec<Eval<E::State>> = if batch.len() == 1 {
            vec![search.evaluate(&batch[0], cutoff)]
        } else {
            batch.par_iter().map(|n| search.evaluate(n, cutoff)).collect()
        };
        for (node, result) in batch.into_iter().zip(results) {
            nodes += 1;
            if node.warm.is_some() {
                warm_budget += 1;
            }
            match result {
                Eval::Pruned | Eval::Infeasible => {}
                Eval::Integral { x } => {
                    if let Some((x, obj)) = search.candidate(&x, None) {
                        search.offer(x, obj);
                    }
                }
                Eval::Branch {
                    x,
                    objective,
                    state,
                    var,
                } => {
                    if objective >= search.cutoff() {
                        continue;
                    }
                    since_dive += 1;
                    let state = Arc::new(state);
                    if opts.dive_every > 0 && since_dive >= opts.dive_every {
                        since_dive = 0;
                        let guide = search.incumbent.as_ref().map(|(_, x)| x.clone());
                        if let Some((cx, cobj)) = search.dive(Some((*state).clone()), x.clone(), guide.as_deref()) {
                            search.offer(cx, cobj);
                        }
                    }
                    // Child nearer the LP value first.
                    let order = if x[var] >= 0.5 { [1.0, 0.0] } else { [0.0, 1.0] };
                    for value in order {
                        let mut fixes = (*node.fixes).clone();
                        fixes.push((var, value));
                        let warm = if warm_budget > 0 {
                            warm_budget -= 1;
                            Some((Arc::clone(&state), (var, value)))
                        } else {
                            None
                        };
                        heap.push(Node {
                            id: next_id,
                            bound: objective,
                            depth: node.depth + 1,
                            fixes: Arc::new(fixes),
                            warm,
                        });
                        next_id += 1;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{Sense, VarRole};

    fn knapsack() -> MilpModel {
        // max 10a + 13b + 7c + 8d, 4a + 6b + 3c + 5d <= 10
        let mut m = MilpModel::new();
        let vals = [10.0, 13.0, 7.0, 8.0];
        let wts = [4.0, 6.0, 3.0, 5.0];
        let vars: Vec<_> = (0..4).map(|i| m.add_binary(format!("x{i}"), VarRole::Other)).collect();
        for (v, c) in vars.iter().zip(vals) {
            m.add_objective(*v, -c);
        }
        let terms: Vec<_> = vars.iter().zip(wts).map(|(&v, w)| (v, w)).collect();
        m.add_constraint("cap", &terms, Sense::Le, 10.0);
        m
    }

    fn brute_knapsack() -> f64 {
        let vals = [10.0, 13.0, 7.0, 8.0];
        let wts = [4.0, 6.0, 3.0, 5.0];
        (0u32..16)
            .filter(|mask| (0..4).filter(|i| mask & (1 << i) != 0).map(|i| wts[i]).sum::<f64>() <= 10.0)
            .map(|mask| -(0..4).filter(|i| mask & (1 << i) != 0).map(|i| vals[i]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn knapsack_matches_enumeration() {
        for backend in [Backend::Dense, Backend::Sparse, Backend::Auto] {
            let opts = SolveOptions {
                mip_gap: 0.0,
                backend,
                ..SolveOptions::default()
            };
            let s = solve(&knapsack(), &opts).unwrap();
            assert_eq!(s.status, SolveStatus::Optimal);
            assert!((s.objective - brute_knapsack()).abs() < 1e-9);
            assert!(s.bound <= s.objective + 1e-9);
        }
    }

    #[test]
    fn signed_link_forces_discreteness() {
        // min x s.t. x >= 0.3, x = p - n, p + n = b, b >= 0.3 -> x = 1
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", -1.0, 1.0, VarRole::Other);
        let p = m.add_binary("p", VarRole::Other);
        let n = m.add_binary("n", VarRole::Other);
        let b = m.add_binary("b", VarRole::Other);
        m.add_objective(x, 1.0);
        m.add_constraint("lo", &[(x, 1.0)], Sense::Ge, 0.3);
        m.add_constraint("sgn", &[(x, 1.0), (p, -1.0), (n, 1.0)], Sense::Eq, 0.0);
        m.add_constraint("mag", &[(p, 1.0), (n, 1.0), (b, -1.0)], Sense::Eq, 0.0);
        let s = solve(&m, &SolveOptions { mip_gap: 0.0, ..SolveOptions::default() }).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-9);
        assert_eq!(s.status, SolveStatus::Optimal);
    }

    #[test]
    fn infeasible_model_reported() {
        let mut m = MilpModel::new();
        let a = m.add_binary("a", VarRole::Other);
        let b = m.add_binary("b", VarRole::Other);
        m.add_constraint("r1", &[(a, 1.0), (b, 1.0)], Sense::Eq, 1.0);
        m.add_constraint("r2", &[(a, 1.0), (b, -1.0)], Sense::Eq, 0.0);
        assert_eq!(solve(&m, &SolveOptions::default()), Err(SolveError::Infeasible));
    }

    #[test]
    fn variable_cap_enforced() {
        let opts = SolveOptions {
            max_variables: 2,
            ..SolveOptions::default()
        };
        assert!(matches!(solve(&knapsack(), &opts), Err(SolveError::ModelTooLarge { .. })));
    }

    #[test]
    fn parallel_workers_agree() {
        let opts = SolveOptions {
            mip_gap: 0.0,
            workers: 3,
            ..SolveOptions::default()
        };
        let s = solve(&knapsack(), &opts).unwrap();
        assert!((s.objective - brute_knapsack()).abs() < 1e-9);
    }
}
