//! End-to-end reconstruction: decomposition, model building, solving and
//! post-processing.
//!
//! Entries that no speller pair connects never interact, and neither do
//! feature groups, so the full model splits into one sub-model per
//! (component, group). Each sub-model is solved on its own and the pieces
//! are stitched back together.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::majority_vote_ipa;
use crate::milp::{assignment_from_vectors, build_group_model, build_model, BigMConfig, BuildError, ReconstructionProblem};
use crate::phonology::{Feature, FeatureGroup, FeatureSchema, FeatureVector};
use crate::solver::{polish, solve_with_start, SolveError, SolveOptions, SolveStatus};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub big_m: BigMConfig,
    pub solver: SolveOptions,
    /// Solve per connected component and feature group.
    pub decompose: bool,
    /// Seed each solve with the IPA-level majority vote.
    pub warm_start: bool,
    /// Move invalid feature groups to valid combinations when this does not
    /// raise the objective.
    pub polish: bool,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            big_m: BigMConfig::default(),
            solver: SolveOptions::default(),
            decompose: true,
            warm_start: true,
            polish: true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("sub-problem {index}: {source}")]
    Solve { index: usize, source: SolveError },
}

impl ReconstructError {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, ReconstructError::Solve { source: SolveError::Infeasible, .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubproblemReport {
    pub entries: usize,
    /// Head feature of the group, or `None` for an undecomposed model.
    pub group: Option<Feature>,
    pub status: SolveStatus,
    pub objective: f64,
    pub bound: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub vectors: Vec<FeatureVector>,
    /// Exact objective of `vectors` under the feature metric.
    pub objective: f64,
    /// Sum of the solver's surrogate objectives, before polishing.
    pub surrogate_objective: f64,
    /// Sum of the proven lower bounds.
    pub bound: f64,
    pub status: SolveStatus,
    pub nodes: usize,
    pub polish_changes: usize,
    pub subproblems: Vec<SubproblemReport>,
}

fn severity(s: SolveStatus) -> u8 {
    match s {
        SolveStatus::Optimal => 0,
        SolveStatus::GapReached => 1,
        SolveStatus::NodeLimit => 2,
        SolveStatus::TimeLimit => 3,
    }
}

/// Rounds LP noise off values that sit on the integer grid.
fn snap(x: f64, tol: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= tol {
        r + 0.0
    } else {
        x
    }
}

struct Task {
    members: Vec<usize>,
    group: Option<FeatureGroup>,
}

pub fn reconstruct(problem: &ReconstructionProblem, opts: &ReconstructOptions) -> Result<Reconstruction, ReconstructError> {
    problem.validate().map_err(BuildError::from)?;
    let n = problem.entries.len();
    let start = opts.warm_start.then(|| majority_vote_ipa(problem));
    let tasks: Vec<Task> = if opts.decompose {
        let components = if problem.lambda_fq > 0.0 {
            problem.components()
        } else {
            (0..n).map(|i| vec![i]).collect()
        };
        let groups = FeatureSchema::standard().groups();
        components
            .into_iter()
            .flat_map(|members| groups.iter().map(move |g| Task { members: members.clone(), group: Some(g.clone()) }))
            .collect()
    } else {
        vec![Task { members: (0..n).collect(), group: None }]
    };

    let run = |(index, task): (usize, &Task)| -> Result<(SubproblemReport, Vec<FeatureVector>), ReconstructError> {
        let sub = problem.restrict(&task.members);
        let rm = match &task.group {
            Some(g) => build_group_model(&sub, &opts.big_m, g)?,
            None => build_model(&sub, &opts.big_m)?,
        };
        let x0 = start.as_ref().map(|s| {
            let vs: Vec<FeatureVector> = task.members.iter().map(|&i| s[i]).collect();
            assignment_from_vectors(&rm, &vs)
        });
        let sol = solve_with_start(&rm.model, &opts.solver, x0.as_deref())
            .map_err(|source| ReconstructError::Solve { index, source })?;
        let report = SubproblemReport {
            entries: task.members.len(),
            group: task.group.as_ref().map(|g| g.head),
            status: sol.status,
            objective: sol.objective,
            bound: sol.bound,
            nodes: sol.nodes,
        };
        Ok((report, rm.vectors(&sol.x)))
    };
    let results: Vec<_> = if opts.solver.workers > 1 {
        tasks.par_iter().enumerate().map(run).collect()
    } else {
        tasks.iter().enumerate().map(run).collect()
    };

    let mut vectors = vec![FeatureVector::ZERO; n];
    let mut subproblems = Vec::with_capacity(tasks.len());
    for (task, result) in tasks.iter().zip(results) {
        let (report, vs) = result?;
        let features: Vec<usize> = match &task.group {
            Some(g) => g.members().map(Feature::index).collect(),
            None => (0..crate::phonology::NUM_FEATURES).collect(),
        };
        for (&e, v) in task.members.iter().zip(&vs) {
            for &f in &features {
                vectors[e].0[f] = snap(v.0[f], opts.solver.integrality_tol);
            }
        }
        subproblems.push(report);
    }
    let polish_changes = if opts.polish { polish(problem, &mut vectors) } else { 0 };
    Ok(Reconstruction {
        objective: problem.exact_objective(&vectors),
        surrogate_objective: subproblems.iter().map(|s| s.objective).sum(),
        bound: subproblems.iter().map(|s| s.bound).sum(),
        status: subproblems.iter().map(|s| s.status).max_by_key(|&s| severity(s)).unwrap_or(SolveStatus::Optimal),
        nodes: subproblems.iter().map(|s| s.nodes).sum(),
        polish_changes,
        subproblems,
        vectors,
    })
}
