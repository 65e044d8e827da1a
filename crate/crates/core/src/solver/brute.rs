//! Exhaustive oracle over inventory assignments.

use thiserror::Error;

use crate::metric::Metric;
use crate::milp::ReconstructionProblem;
use crate::phonology::{Feature, FeatureSchema, FeatureVector, PhonemeInventory};

/// Largest number of assignments the oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BruteForceError {
    #[error("{0:.3e} assignments exceed the enumeration limit")]
    TooLarge(f64),
    #[error("inventory is empty")]
    EmptyInventory,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceSolution {
    pub objective: f64,
    /// Chosen symbol per entry.
    pub symbols: Vec<String>,
    pub vectors: Vec<FeatureVector>,
    pub assignments: u64,
}

/// Enumerates every assignment of inventory vectors to entries and returns
/// the minimiser of the exact objective. Ties go to the lexicographically
/// smallest symbol sequence.
pub fn brute_force_solve(
    problem: &ReconstructionProblem,
    inventory: &PhonemeInventory,
) -> Result<BruteForceSolution, BruteForceError> {
    let candidates: Vec<(&str, &FeatureVector)> = inventory.iter().collect();
    let k = candidates.len();
    if k == 0 {
        return Err(BruteForceError::EmptyInventory);
    }
    let n = problem.entries.len();
    let total = (k as f64).powi(n as i32);
    if total > BRUTE_FORCE_LIMIT {
        return Err(BruteForceError::TooLarge(total));
    }
    let metric = Metric::default();
    let lambda = problem.lambda_fq;
    // Unary cost per (entry, candidate) and pair cost per (candidate, candidate).
    let unary: Vec<Vec<f64>> = problem
        .entries
        .iter()
        .map(|e| {
            candidates
                .iter()
                .map(|(_, v)| (1.0 - lambda) * e.readings.iter().flatten().map(|r| metric.distance(v, r)).sum::<f64>())
                .collect()
        })
        .collect();
    let dist: Vec<Vec<f64>> = candidates
        .iter()
        .map(|(_, a)| candidates.iter().map(|(_, b)| metric.distance(a, b)).collect())
        .collect();

    let mut choice = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut count = 0u64;
    loop {
        count += 1;
        let mut obj: f64 = choice.iter().enumerate().map(|(e, &c)| unary[e][c]).sum();
        for p in &problem.pairs {
            obj += lambda * problem.pair_weight(p) * dist[choice[p.x]][choice[p.xu]];
        }
        // Enumeration is in lexicographic order, so strict improvement keeps
        // the smallest tied assignment.
        if best.as_ref().is_none_or(|(b, _)| obj < b - 1e-12) {
            best = Some((obj, choice.clone()));
        }
        // Odometer increment, last entry fastest.
        let mut i = n;
        loop {
            if i == 0 {
                let (objective, picks) = best.expect("at least one assignment");
                return Ok(BruteForceSolution {
                    objective,
                    symbols: picks.iter().map(|&c| candidates[c].0.to_string()).collect(),
                    vectors: picks.iter().map(|&c| *candidates[c].1).collect(),
                    assignments: count,
                });
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < k {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// Exact minimiser of the objective over every sound grid vector (all valid
/// combinations of the schema, not only catalogued phonemes). The metric and
/// the validity table never couple two feature groups, so each group is
/// enumerated on its own and the optima are recombined.
pub fn grid_oracle(problem: &ReconstructionProblem) -> Result<BruteForceSolution, BruteForceError> {
    let schema = FeatureSchema::standard();
    let metric = Metric::default();
    let lambda = problem.lambda_fq;
    let n = problem.entries.len();
    let mut vectors = vec![FeatureVector::ZERO; n];
    let mut objective = 0.0;
    let mut count = 0u64;
    for group in schema.groups() {
        let members: Vec<usize> = group.members().map(Feature::index).collect();
        let tuples: Vec<FeatureVector> = schema
            .valid_tuples(&group)
            .into_iter()
            .map(|t| {
                let mut v = FeatureVector::ZERO;
                for (&i, x) in members.iter().zip(t) {
                    v.0[i] = x;
                }
                v
            })
            .collect();
        let k = tuples.len();
        let total = (k as f64).powi(n as i32);
        if total > BRUTE_FORCE_LIMIT {
            return Err(BruteForceError::TooLarge(total));
        }
        let cost = |a: &FeatureVector, b: &FeatureVector| members.iter().map(|&f| metric.term(a, b, f)).sum::<f64>();
        let unary: Vec<Vec<f64>> = problem
            .entries
            .iter()
            .map(|e| {
                tuples
                    .iter()
                    .map(|t| (1.0 - lambda) * e.readings.iter().flatten().map(|r| cost(t, r)).sum::<f64>())
                    .collect()
            })
            .collect();
        let pair: Vec<Vec<f64>> = tuples.iter().map(|a| tuples.iter().map(|b| cost(a, b)).collect()).collect();
        let mut choice = vec![0usize; n];
        let mut best: Option<(f64, Vec<usize>)> = None;
        'enumerate: loop {
            count += 1;
            let mut obj: f64 = choice.iter().enumerate().map(|(e, &c)| unary[e][c]).sum();
            for p in &problem.pairs {
                obj += lambda * problem.pair_weight(p) * pair[choice[p.x]][choice[p.xu]];
            }
            if best.as_ref().is_none_or(|(b, _)| obj < b - 1e-12) {
                best = Some((obj, choice.clone()));
            }
            let mut i = n;
            loop {
                if i == 0 {
                    break 'enumerate;
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < k {
                    break;
                }
                choice[i] = 0;
            }
        }
        let (obj, picks) = best.expect("non-empty enumeration");
        objective += obj;
        for (v, &c) in vectors.iter_mut().zip(&picks) {
            for &i in &members {
                v.0[i] = tuples[c].0[i];
            }
        }
    }
    let inv = PhonemeInventory::ipa();
    Ok(BruteForceSolution {
        objective,
        symbols: vectors
            .iter()
            .map(|v| inv.symbol_of(v).map_or_else(|| "?".to_string(), str::to_string))
            .collect(),
        vectors,
        assignments: count,
    })
}
