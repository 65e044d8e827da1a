//! LP backends used by branch-and-bound.
//!
//! Branching only ever fixes binaries, so a backend answers one question:
//! solve the relaxation with a set of variables fixed, optionally starting
//! from the state of an earlier solve.

use std::sync::OnceLock;

use super::lp::{LpData, LpStatus};
use super::simplex::{self, SimplexOptions};
use crate::milp::Sense;

pub enum LpOutcome<S> {
    Optimal { x: Vec<f64>, objective: f64, state: S },
    Infeasible,
    /// The backend gave up (iteration limit or numerical failure).
    Failed,
}

pub trait LpEngine: Sync {
    type State: Clone + Send + Sync;

    /// Solves with `fixes` applied on top of `base` (or of the root model).
    fn solve(&self, base: Option<&Self::State>, fixes: &[(usize, f64)]) -> LpOutcome<Self::State>;

    fn name(&self) -> &'static str;
}

/// Cold-started dense simplex; the state is the list of fixings.
pub struct DenseEngine {
    lp: LpData,
    opts: SimplexOptions,
}

impl DenseEngine {
    pub fn new(lp: LpData, opts: SimplexOptions) -> Self {
        DenseEngine { lp, opts }
    }
}

impl LpEngine for DenseEngine {
    type State = Vec<(usize, f64)>;

    fn solve(&self, base: Option<&Self::State>, fixes: &[(usize, f64)]) -> LpOutcome<Self::State> {
        let mut lp = self.lp.clone();
        let mut all: Vec<(usize, f64)> = base.cloned().unwrap_or_default();
        all.extend_from_slice(fixes);
        for &(j, v) in &all {
            if v < lp.lower[j] - 1e-9 || v > lp.upper[j] + 1e-9 {
                return LpOutcome::Infeasible;
            }
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        let r = simplex::solve(&lp, &self.opts);
        match r.status {
            LpStatus::Optimal => LpOutcome::Optimal {
                x: r.x,
                objective: r.objective,
                state: all,
            },
            LpStatus::Infeasible => LpOutcome::Infeasible,
            LpStatus::Unbounded | LpStatus::Limit => LpOutcome::Failed,
        }
    }

    fn name(&self) -> &'static str {
        "dense"
    }
}

/// Sparse LU simplex from the `microlp` crate, warm-started through its dual
/// simplex when variables are fixed.
pub struct SparseEngine {
    problem: microlp::Problem,
    vars: Vec<microlp::Variable>,
    offset: f64,
    root: OnceLock<Option<microlp::Solution>>,
}

impl SparseEngine {
    pub fn new(lp: &LpData) -> Self {
        let mut problem = microlp::Problem::new(microlp::OptimizationDirection::Minimize);
        let vars: Vec<_> = (0..lp.num_vars())
            .map(|j| problem.add_var(lp.cost[j], (lp.lower[j], lp.upper[j])))
            .collect();
        for row in &lp.rows {
            let mut expr = microlp::LinearExpr::empty();
            for &(j, a) in &row.terms {
                expr.add(vars[j], a);
            }
            let op = match row.sense {
                Sense::Le => microlp::ComparisonOp::Le,
                Sense::Ge => microlp::ComparisonOp::Ge,
                Sense::Eq => microlp::ComparisonOp::Eq,
            };
            problem.add_constraint(expr, op, row.rhs);
        }
        SparseEngine {
            problem,
            vars,
            offset: lp.offset,
            root: OnceLock::new(),
        }
    }

    fn root(&self) -> Option<&microlp::Solution> {
        self.root
            .get_or_init(|| match self.problem.solve() {
                Ok(microlp::SolveOutcome::Solution(s)) => Some(s),
                _ => None,
            })
            .as_ref()
    }

    fn outcome(&self, sol: microlp::Solution) -> LpOutcome<microlp::Solution> {
        let x: Vec<f64> = self.vars.iter().map(|&v| sol.var_value_raw(v)).collect();
        LpOutcome::Optimal {
            x,
            objective: sol.objective() + self.offset,
            state: sol,
        }
    }
}

impl LpEngine for SparseEngine {
    type State = microlp::Solution;

    fn solve(&self, base: Option<&Self::State>, fixes: &[(usize, f64)]) -> LpOutcome<Self::State> {
        let start = match base {
            Some(s) => s.clone(),
            None => match self.root() {
                Some(s) => s.clone(),
                None => {
                    return match self.problem.solve() {
                        Err(microlp::Error::Infeasible) => LpOutcome::Infeasible,
                        _ => LpOutcome::Failed,
                    }
                }
            },
        };
        let mut sol = start;
        for &(j, v) in fixes {
            match sol.fix_var(self.vars[j], v) {
                Ok(microlp::SolveOutcome::Solution(s)) => sol = s,
                Ok(_) => return LpOutcome::Failed,
                Err(microlp::Error::Infeasible) => return LpOutcome::Infeasible,
                Err(_) => return LpOutcome::Failed,
            }
        }
        self.outcome(sol)
    }

    fn name(&self) -> &'static str {
        "sparse"
    }
}

/// Warm-started sparse solves, with a cold dense re-solve of the node when
/// the sparse backend gives up.
pub struct HybridEngine {
    sparse: SparseEngine,
    dense: DenseEngine,
}

#[derive(Clone)]
pub struct HybridState {
    /// Absent after a dense fallback; the next solve restarts from the root.
    sparse: Option<microlp::Solution>,
    fixes: Vec<(usize, f64)>,
}

impl HybridEngine {
    pub fn new(lp: LpData, opts: SimplexOptions) -> Self {
        HybridEngine {
            sparse: SparseEngine::new(&lp),
            dense: DenseEngine::new(lp, opts),
        }
    }
}

impl LpEngine for HybridEngine {
    type State = HybridState;

    fn solve(&self, base: Option<&Self::State>, fixes: &[(usize, f64)]) -> LpOutcome<Self::State> {
        let mut all: Vec<(usize, f64)> = base.map(|b| b.fixes.clone()).unwrap_or_default();
        all.extend_from_slice(fixes);
        let sparse = match base {
            None => self.sparse.solve(None, fixes),
            Some(HybridState { sparse: Some(s), .. }) => self.sparse.solve(Some(s), fixes),
            Some(HybridState { sparse: None, .. }) => self.sparse.solve(None, &all),
        };
        match sparse {
            LpOutcome::Optimal { x, objective, state } => LpOutcome::Optimal {
                x,
                objective,
                state: HybridState { sparse: Some(state), fixes: all },
            },
            LpOutcome::Infeasible => LpOutcome::Infeasible,
            LpOutcome::Failed => {
                log::debug!("sparse LP failed; re-solving the node with the dense simplex");
                match self.dense.solve(None, &all) {
                    LpOutcome::Optimal { x, objective, .. } => LpOutcome::Optimal {
                        x,
                        objective,
                        state: HybridState { sparse: None, fixes: all },
                    },
                    LpOutcome::Infeasible => LpOutcome::Infeasible,
                    LpOutcome::Failed => LpOutcome::Failed,
                }
            }
        }
    }

    fn name(&self) -> &'static str {
        "hybrid"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::lp::LpRow;

    fn knapsack_relaxation() -> LpData {
        // min -(5a + 4b + 3c), 2a + 3b + c <= 5, vars in [0, 1]
        LpData {
            cost: vec![-5.0, -4.0, -3.0],
            lower: vec![0.0; 3],
            upper: vec![1.0; 3],
            rows: vec![LpRow {
                terms: vec![(0, 2.0), (1, 3.0), (2, 1.0)],
                sense: Sense::Le,
                rhs: 5.0,
            }],
            offset: 0.0,
        }
    }

    fn objective<S>(o: LpOutcome<S>) -> Option<f64> {
        match o {
            LpOutcome::Optimal { objective, .. } => Some(objective),
            _ => None,
        }
    }

    #[test]
    fn engines_agree_on_fixings() {
        let lp = knapsack_relaxation();
        let dense = DenseEngine::new(lp.clone(), SimplexOptions::default());
        let sparse = SparseEngine::new(&lp);
        let hybrid = HybridEngine::new(lp.clone(), SimplexOptions::default());
        for fixes in [vec![], vec![(1, 1.0)], vec![(1, 1.0), (0, 1.0)], vec![(2, 0.0)]] {
            let a = objective(dense.solve(None, &fixes)).unwrap();
            let b = objective(sparse.solve(None, &fixes)).unwrap();
            let c = objective(hybrid.solve(None, &fixes)).unwrap();
            assert!((a - b).abs() < 1e-7 && (a - c).abs() < 1e-7, "{fixes:?}: {a} vs {b} vs {c}");
        }
    }

    #[test]
    fn warm_state_chains() {
        let lp = knapsack_relaxation();
        let sparse = SparseEngine::new(&lp);
        let LpOutcome::Optimal { state, .. } = sparse.solve(None, &[(1, 1.0)]) else {
            panic!()
        };
        let chained = objective(sparse.solve(Some(&state), &[(0, 1.0)])).unwrap();
        let direct = objective(sparse.solve(None, &[(1, 1.0), (0, 1.0)])).unwrap();
        assert!((chained - direct).abs() < 1e-9);
    }

    #[test]
    fn hybrid_state_after_dense_fallback_restarts_from_root() {
        let lp = knapsack_relaxation();
        let hybrid = HybridEngine::new(lp.clone(), SimplexOptions::default());
        let detached = HybridState { sparse: None, fixes: vec![(1, 1.0)] };
        let chained = objective(hybrid.solve(Some(&detached), &[(0, 1.0)])).unwrap();
        let dense = DenseEngine::new(lp, SimplexOptions::default());
        let direct = objective(dense.solve(None, &[(1, 1.0), (0, 1.0)])).unwrap();
        assert!((chained - direct).abs() < 1e-9);
    }
}
