//! Solver-agnostic mixed-integer linear model.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::phonology::Feature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

/// What a variable stands for, kept for extraction and reporting.
#[derive(Clone, Debug, PartialEq)]
pub enum VarRole {
    /// Feature value of one entry.
    Feature { entry: usize, feature: Feature },
    /// Distance surrogate (epigraph or gated dependent-feature term).
    Distance,
    /// Governor-difference indicator of a distance term.
    GateIndicator,
    /// Consistency binary for an entry's dependent features.
    Consistency { entry: usize },
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub role: VarRole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * x[v.0]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("invalid name {0:?}")]
    InvalidName(String),
    #[error("variable {0:?} has empty or non-finite bounds")]
    BadBounds(String),
    #[error("row {0:?} references an unknown variable or repeats one")]
    BadTerms(String),
    #[error("non-finite coefficient in {0:?}")]
    NonFinite(String),
}

/// Minimise `objective · x + objective_offset` subject to linear rows, finite
/// variable bounds and binary domains.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Dense objective coefficients, one per variable.
    pub objective: Vec<f64>,
    pub objective_offset: f64,
}

/// Names must be usable in LP text: no leading digit, `.` or `e`/`E`, and no
/// whitespace or operator characters.
pub fn is_valid_name(name: &str) -> bool {
    let Some(first) = name.chars().next() else {
        return false;
    };
    if first.is_ascii_digit() || matches!(first, '.' | 'e' | 'E') {
        return false;
    }
    name.len() <= 255
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_!\"#$%&()/,.;?@'`{}|~".contains(c))
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64, role: VarRole) -> VarId {
        self.push_var(Variable {
            name: name.into(),
            kind: VarKind::Continuous,
            lower,
            upper,
            role,
        })
    }

    pub fn add_binary(&mut self, name: impl Into<String>, role: VarRole) -> VarId {
        self.push_var(Variable {
            name: name.into(),
            kind: VarKind::Binary,
            lower: 0.0,
            upper: 1.0,
            role,
        })
    }

    fn push_var(&mut self, var: Variable) -> VarId {
        self.variables.push(var);
        self.objective.push(0.0);
        VarId(self.variables.len() - 1)
    }

    /// Adds `coef` to the objective coefficient of `var`.
    pub fn add_objective(&mut self, var: VarId, coef: f64) {
        self.objective[var.0] += coef;
    }

    /// Adds a row, merging repeated variables and dropping zero coefficients.
    pub fn add_constraint(&mut self, name: impl Into<String>, terms: &[(VarId, f64)], sense: Sense, rhs: f64) {
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for &(v, a) in terms {
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(slot) => slot.1 += a,
                None => merged.push((v, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.constraints.push(Constraint {
            name: name.into(),
            terms: merged,
            sense,
            rhs,
        });
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.objective_offset
    }

    /// Largest row, bound or integrality violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(x)).fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &val)| {
                let b = (v.lower - val).max(val - v.upper).max(0.0);
                let i = if v.kind == VarKind::Binary { (val - val.round()).abs() } else { 0.0 };
                b.max(i)
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut names = HashSet::new();
        for v in &self.variables {
            if !is_valid_name(&v.name) {
                return Err(ModelError::InvalidName(v.name.clone()));
            }
            if !names.insert(v.name.as_str()) {
                return Err(ModelError::DuplicateName(v.name.clone()));
            }
            if !(v.lower.is_finite() && v.upper.is_finite() && v.lower <= v.upper) {
                return Err(ModelError::BadBounds(v.name.clone()));
            }
        }
        if self.objective.len() != self.variables.len() || self.objective.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::NonFinite("objective".into()));
        }
        let mut row_names = HashSet::new();
        for c in &self.constraints {
            if !is_valid_name(&c.name) {
                return Err(ModelError::InvalidName(c.name.clone()));
            }
            if !row_names.insert(c.name.as_str()) {
                return Err(ModelError::DuplicateName(c.name.clone()));
            }
            if !c.rhs.is_finite() || c.terms.iter().any(|(_, a)| !a.is_finite()) {
                return Err(ModelError::NonFinite(c.name.clone()));
            }
            let mut seen = HashSet::new();
            if c.terms.iter().any(|(v, _)| v.0 >= self.variables.len() || !seen.insert(*v)) {
                return Err(ModelError::BadTerms(c.name.clone()));
            }
        }
        Ok(())
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }
}
