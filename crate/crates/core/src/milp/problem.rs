//! Reconstruction problem: entries, their variety readings and speller pairs.

use std::collections::HashMap;

use thiserror::Error;

use crate::phonology::FeatureVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("problem has no entries with readings or speller pairs")]
    EmptyProblem,
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("duplicate entry id {0:?}")]
    DuplicateEntryId(String),
    #[error("speller pair references unknown entry {0:?}")]
    DanglingSpeller(String),
    #[error("entry {entry:?} has {found} readings but there are {expected} varieties")]
    ReadingCount { entry: String, found: usize, expected: usize },
}

/// One character pronunciation to reconstruct.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub id: String,
    pub character: String,
    pub category: Option<String>,
    pub medial: Option<String>,
    /// One slot per variety; `None` where the variety has no reading.
    pub readings: Vec<Option<FeatureVector>>,
}

impl Entry {
    pub fn new(id: impl Into<String>, readings: Vec<Option<FeatureVector>>) -> Self {
        let id = id.into();
        Entry {
            character: id.clone(),
            id,
            category: None,
            medial: None,
            readings,
        }
    }
}

/// An upper-speller (or homophone) annotation claiming `x` and `xu` share an
/// initial. Indices point into [`ReconstructionProblem::entries`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpellerPair {
    pub x: usize,
    pub xu: usize,
    pub medial_match: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionProblem {
    pub varieties: Vec<String>,
    pub entries: Vec<Entry>,
    pub pairs: Vec<SpellerPair>,
    /// Weight of the speller-pair half of the objective, in `[0, 1)`.
    pub lambda_fq: f64,
    /// Multiplier for pairs whose medials match, at least 1.
    pub k_medial: f64,
}

impl ReconstructionProblem {
    /// Builds a problem, resolving pair ids and checking invariants.
    pub fn new(
        varieties: Vec<String>,
        entries: Vec<Entry>,
        pairs: &[(String, String)],
        lambda_fq: f64,
        k_medial: f64,
    ) -> Result<Self, ProblemError> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.id.as_str(), i).is_some() {
                return Err(ProblemError::DuplicateEntryId(e.id.clone()));
            }
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| ProblemError::DanglingSpeller(id.to_string()))
        };
        let mut resolved = Vec::with_capacity(pairs.len());
        for (x, xu) in pairs {
            let (x, xu) = (lookup(x)?, lookup(xu)?);
            let medial_match = match (&entries[x].medial, &entries[xu].medial) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            };
            resolved.push(SpellerPair { x, xu, medial_match });
        }
        let problem = ReconstructionProblem {
            varieties,
            entries,
            pairs: resolved,
            lambda_fq,
            k_medial,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if !(0.0..1.0).contains(&self.lambda_fq) {
            return Err(ProblemError::InvalidWeight(format!(
                "lambda_fq = {} must lie in [0, 1)",
                self.lambda_fq
            )));
        }
        if !(self.k_medial >= 1.0 && self.k_medial.is_finite()) {
            return Err(ProblemError::InvalidWeight(format!("k = {} must be at least 1", self.k_medial)));
        }
        for e in &self.entries {
            if e.readings.len() != self.varieties.len() {
                return Err(ProblemError::ReadingCount {
                    entry: e.id.clone(),
                    found: e.readings.len(),
                    expected: self.varieties.len(),
                });
            }
        }
        for p in &self.pairs {
            for i in [p.x, p.xu] {
                if i >= self.entries.len() {
                    return Err(ProblemError::DanglingSpeller(format!("#{i}")));
                }
            }
        }
        let has_reading = self.entries.iter().any(|e| e.readings.iter().any(Option::is_some));
        if self.entries.is_empty() || (!has_reading && self.pairs.is_empty()) {
            return Err(ProblemError::EmptyProblem);
        }
        Ok(())
    }

    pub fn pair_weight(&self, pair: &SpellerPair) -> f64 {
        if pair.medial_match {
            self.k_medial
        } else {
            1.0
        }
    }

    pub fn entry_index(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.id == id)
    }

    /// Exact objective of an assignment under a distance function.
    pub fn objective_with(&self, vectors: &[FeatureVector], d: impl Fn(&FeatureVector, &FeatureVector) -> f64) -> f64 {
        let d = &d;
        let pairs: f64 = self
            .pairs
            .iter()
            .map(|p| self.pair_weight(p) * d(&vectors[p.x], &vectors[p.xu]))
            .sum();
        let readings: f64 = self
            .entries
            .iter()
            .zip(vectors)
            .flat_map(|(e, v)| e.readings.iter().flatten().map(move |r| d(v, r)))
            .sum();
        self.lambda_fq * pairs + (1.0 - self.lambda_fq) * readings
    }

    /// Exact objective under the feature metric.
    pub fn exact_objective(&self, vectors: &[FeatureVector]) -> f64 {
        self.objective_with(vectors, crate::metric::distance)
    }

    /// Splits entries into groups connected by speller pairs. Each group is a
    /// sorted list of entry indices; groups are ordered by their first index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.entries.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for p in &self.pairs {
            let (a, b) = (find(&mut parent, p.x), find(&mut parent, p.xu));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        groups
    }

    /// Sub-problem restricted to `members` (pairs with both ends inside).
    pub fn restrict(&self, members: &[usize]) -> ReconstructionProblem {
        let mut map = vec![usize::MAX; self.entries.len()];
        for (new, &old) in members.iter().enumerate() {
            map[old] = new;
        }
        ReconstructionProblem {
            varieties: self.varieties.clone(),
            entries: members.iter().map(|&i| self.entries[i].clone()).collect(),
            pairs: self
                .pairs
                .iter()
                .filter(|p| map[p.x] != usize::MAX && map[p.xu] != usize::MAX)
                .map(|p| SpellerPair {
                    x: map[p.x],
                    xu: map[p.xu],
                    medial_match: p.medial_match,
                })
                .collect(),
            lambda_fq: self.lambda_fq,
            k_medial: self.k_medial,
        }
    }
}
