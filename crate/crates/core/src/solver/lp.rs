//! LP relaxation data shared by the simplex backends.

use crate::milp::{MilpModel, Sense};

#[derive(Clone, Debug, PartialEq)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min cost·x` subject to rows and `lower <= x <= upper`. Bounds may be
/// infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct LpData {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub offset: f64,
}

impl LpData {
    /// Continuous relaxation of a model.
    pub fn relaxation(model: &MilpModel) -> Self {
        LpData {
            cost: model.objective.clone(),
            lower: model.variables.iter().map(|v| v.lower).collect(),
            upper: model.variables.iter().map(|v| v.upper).collect(),
            rows: model
                .constraints
                .iter()
                .map(|c| LpRow {
                    terms: c.terms.iter().map(|&(v, a)| (v.0, a)).collect(),
                    sense: c.sense,
                    rhs: c.rhs,
                })
                .collect(),
            offset: model.objective_offset,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.offset
    }

    /// Largest row or bound violation.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            let lhs: f64 = r.terms.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match r.sense {
                Sense::Le => lhs - r.rhs,
                Sense::Ge => r.rhs - lhs,
                Sense::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for ((l, u), v) in self.lower.iter().zip(&self.upper).zip(x) {
            worst = worst.max(l - v).max(v - u);
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration or time budget exhausted.
    Limit,
}
