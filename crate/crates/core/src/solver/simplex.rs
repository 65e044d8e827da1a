//! Dense revised primal simplex for bounded variables.
//!
//! Nonbasic variables sit at one of their bounds (free variables at zero) and
//! the basis inverse is held explicitly, updated by elementary row operations
//! and refactorised periodically. Rows are scaled to a maximum absolute
//! coefficient of one before solving. Phase one minimises the sum of
//! artificial variables placed only on rows whose slack cannot start basic.
//! Pricing is Dantzig's rule with a Harris ratio test; after a run of
//! degenerate pivots it switches to Bland's rule until progress resumes.

use super::lp::{LpData, LpStatus};
use crate::milp::Sense;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub max_iterations: usize,
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            max_iterations: 500_000,
            refactor_every: 64,
            degenerate_limit: 25,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub status: LpStatus,
    /// Structural variable values (empty unless optimal).
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

const NOT_BASIC: usize = usize::MAX;

struct Tableau {
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    /// Row of each basic column, `NOT_BASIC` otherwise.
    row_of: Vec<usize>,
    /// Row-major dense basis inverse.
    binv: Vec<f64>,
    first_artificial: usize,
    opts: SimplexOptions,
    iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Moved { degenerate: bool },
}

impl Tableau {
    fn build(lp: &LpData, opts: SimplexOptions) -> Tableau {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut b = vec![0.0; m];
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut slack_of = vec![None; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let scale = row.terms.iter().fold(0.0f64, |s, &(_, a)| s.max(a.abs()));
            let scale = if scale > 0.0 { scale } else { 1.0 };
            for &(j, a) in &row.terms {
                cols[j].push((i, a / scale));
            }
            b[i] = row.rhs / scale;
            let sign = match row.sense {
                Sense::Le => Some(1.0),
                Sense::Ge => Some(-1.0),
                Sense::Eq => None,
            };
            if let Some(sign) = sign {
                slack_of[i] = Some(cols.len());
                cols.push(vec![(i, sign)]);
                lower.push(0.0);
                upper.push(f64::INFINITY);
            }
        }
        let first_artificial = cols.len();
        for i in 0..m {
            cols.push(vec![(i, 1.0)]);
            lower.push(0.0);
            upper.push(0.0);
        }

        // Nonbasic starting values: the finite bound nearest zero.
        let mut x: Vec<f64> = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| {
                if l.is_finite() && u.is_finite() {
                    if l.abs() <= u.abs() {
                        l
                    } else {
                        u
                    }
                } else if l.is_finite() {
                    l
                } else if u.is_finite() {
                    u
                } else {
                    0.0
                }
            })
            .collect();
        let mut residual = b.clone();
        for (j, col) in cols.iter().enumerate().take(first_artificial) {
            if slack_of.contains(&Some(j)) {
                continue;
            }
            for &(i, a) in col {
                residual[i] -= a * x[j];
            }
        }
        let mut basis = vec![0; m];
        let mut row_of = vec![NOT_BASIC; cols.len()];
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            let slack_ok = slack_of[i].map(|s| {
                let sign = cols[s][0].1;
                residual[i] * sign >= 0.0
            });
            if let (Some(true), Some(s)) = (slack_ok, slack_of[i]) {
                let sign = cols[s][0].1;
                basis[i] = s;
                x[s] = residual[i] * sign;
                binv[i * m + i] = sign;
            } else {
                if let Some(s) = slack_of[i] {
                    x[s] = 0.0;
                }
                let a = first_artificial + i;
                let sign = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
                cols[a][0].1 = sign;
                upper[a] = f64::INFINITY;
                basis[i] = a;
                x[a] = residual[i].abs();
                binv[i * m + i] = sign;
            }
            row_of[basis[i]] = i;
        }
        Tableau {
            m,
            cols,
            b,
            lower,
            upper,
            x,
            basis,
            row_of,
            binv,
            first_artificial,
            opts,
            iterations: 0,
        }
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for &(k, a) in &self.cols[j] {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.binv[i * m + k] * a;
            }
        }
        out
    }

    /// `y = c_B · B⁻¹`.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for i in 0..m {
            let c = cost[self.basis[i]];
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, r) in y.iter_mut().zip(row) {
                    *yk += c * r;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
    }

    /// Rebuilds the basis inverse and basic values from scratch.
    fn refactor(&mut self) {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (c, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                a[i * m + c] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        // Gauss-Jordan with partial pivoting on columns of B; a singular
        // column is swapped for the artificial of an unused row.
        let mut used_row = vec![false; m];
        let mut pivot_row_of_col = vec![usize::MAX; m];
        for c in 0..m {
            let mut best = usize::MAX;
            let mut best_val = 1e-11;
            for r in 0..m {
                if !used_row[r] && a[r * m + c].abs() > best_val {
                    best_val = a[r * m + c].abs();
                    best = r;
                }
            }
            if best == usize::MAX {
                pivot_row_of_col[c] = usize::MAX;
                continue;
            }
            used_row[best] = true;
            pivot_row_of_col[c] = best;
            let p = a[best * m + c];
            for k in 0..m {
                a[best * m + k] /= p;
                inv[best * m + k] /= p;
            }
            for r in 0..m {
                if r != best {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[best * m + k];
                            inv[r * m + k] -= f * inv[best * m + k];
                        }
                    }
                }
            }
        }
        if pivot_row_of_col.contains(&usize::MAX) {
            // Replace dependent columns by artificials of free rows, then retry.
            let mut free_rows = (0..m).filter(|r| !used_row[*r]);
            for c in 0..m {
                if pivot_row_of_col[c] == usize::MAX {
                    let r = free_rows.next().expect("rank deficiency bookkeeping");
                    let old = self.basis[c];
                    self.row_of[old] = NOT_BASIC;
                    self.x[old] = self.snap(old);
                    let art = self.first_artificial + r;
                    self.cols[art][0].1 = 1.0;
                    self.basis[c] = art;
                    self.row_of[art] = c;
                }
            }
            return self.refactor();
        }
        // Row c of B⁻¹ corresponds to basis position c: permute.
        let mut binv = vec![0.0; m * m];
        for c in 0..m {
            let r = pivot_row_of_col[c];
            binv[c * m..(c + 1) * m].copy_from_slice(&inv[r * m..(r + 1) * m]);
        }
        self.binv = binv;
        self.recompute_basic();
    }

    fn snap(&self, j: usize) -> f64 {
        let (l, u, v) = (self.lower[j], self.upper[j], self.x[j]);
        if l.is_finite() && (!u.is_finite() || (v - l).abs() <= (u - v).abs()) {
            l
        } else if u.is_finite() {
            u
        } else {
            0.0
        }
    }

    fn recompute_basic(&mut self) {
        let m = self.m;
        let mut r = self.b.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if self.row_of[j] == NOT_BASIC && self.x[j] != 0.0 {
                for &(i, a) in col {
                    r[i] -= a * self.x[j];
                }
            }
        }
        for c in 0..m {
            let row = &self.binv[c * m..(c + 1) * m];
            self.x[self.basis[c]] = row.iter().zip(&r).map(|(a, b)| a * b).sum();
        }
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let p = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= p;
        }
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
        for (i, &f) in alpha.iter().enumerate() {
            if i != r && f != 0.0 {
                let row = &mut self.binv[i * m..(i + 1) * m];
                for (v, pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
    }

    fn step(&mut self, cost: &[f64], bland: bool) -> Step {
        let tol = self.opts.optimality_tol;
        let y = self.duals(cost);
        let mut entering = None;
        let mut best = 0.0;
        for j in 0..self.cols.len() {
            if self.row_of[j] != NOT_BASIC || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(cost, &y, j);
            let can_up = self.x[j] < self.upper[j];
            let can_down = self.x[j] > self.lower[j];
            let dir = if d < -tol && can_up {
                1.0
            } else if d > tol && can_down {
                -1.0
            } else {
                continue;
            };
            if bland {
                entering = Some((j, dir));
                break;
            }
            if d.abs() > best {
                best = d.abs();
                entering = Some((j, dir));
            }
        }
        let Some((q, dir)) = entering else {
            return Step::Optimal;
        };
        let alpha = self.ftran(q);
        let ftol = self.opts.feasibility_tol;
        let ptol = self.opts.pivot_tol;

        // Harris pass one: largest step respecting relaxed bounds.
        let limit = |i: usize, relax: f64| -> Option<f64> {
            let rate = -dir * alpha[i];
            if rate.abs() <= ptol {
                return None;
            }
            let j = self.basis[i];
            if rate < 0.0 && self.lower[j].is_finite() {
                Some(((self.x[j] - self.lower[j] + relax) / -rate).max(0.0))
            } else if rate > 0.0 && self.upper[j].is_finite() {
                Some(((self.upper[j] - self.x[j] + relax) / rate).max(0.0))
            } else {
                None
            }
        };
        let mut leave: Option<usize> = None;
        let mut theta = f64::INFINITY;
        if bland {
            for i in 0..self.m {
                if let Some(t) = limit(i, 0.0) {
                    let better = t < theta - 1e-15
                        || ((t - theta).abs() <= 1e-15 && leave.is_some_and(|l| self.basis[i] < self.basis[l]));
                    if better {
                        theta = t;
                        leave = Some(i);
                    }
                }
            }
        } else {
            let mut relaxed = f64::INFINITY;
            for i in 0..self.m {
                if let Some(t) = limit(i, ftol) {
                    relaxed = relaxed.min(t);
                }
            }
            if relaxed.is_finite() {
                let mut best_pivot = 0.0;
                for i in 0..self.m {
                    if let Some(t) = limit(i, 0.0) {
                        if t <= relaxed && alpha[i].abs() > best_pivot {
                            best_pivot = alpha[i].abs();
                            leave = Some(i);
                            theta = t;
                        }
                    }
                }
            }
        }
        let flip = self.upper[q] - self.lower[q];
        if flip.is_finite() && flip <= theta {
            // Bound flip, basis unchanged.
            let step = dir * flip;
            self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
            for i in 0..self.m {
                self.x[self.basis[i]] -= step * alpha[i];
            }
            return Step::Moved { degenerate: flip == 0.0 };
        }
        let Some(r) = leave else {
            return Step::Unbounded;
        };
        let step = dir * theta;
        for i in 0..self.m {
            self.x[self.basis[i]] -= step * alpha[i];
        }
        self.x[q] += step;
        let out = self.basis[r];
        // The leaving variable lands exactly on the bound it hit.
        let rate = -dir * alpha[r];
        self.x[out] = if rate < 0.0 { self.lower[out] } else { self.upper[out] };
        self.row_of[out] = NOT_BASIC;
        self.basis[r] = q;
        self.row_of[q] = r;
        self.pivot(r, &alpha);
        self.iterations += 1;
        if self.iterations.is_multiple_of(self.opts.refactor_every) {
            self.refactor();
        }
        Step::Moved { degenerate: theta <= 1e-12 }
    }

    fn run(&mut self, cost: &[f64]) -> LpStatus {
        let mut degenerate_run = 0;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return LpStatus::Limit;
            }
            let bland = degenerate_run >= self.opts.degenerate_limit;
            match self.step(cost, bland) {
                Step::Optimal => {
                    // Confirm on a fresh factorisation before declaring optimality.
                    self.refactor();
                    if matches!(self.step_probe(cost), Step::Optimal) {
                        return LpStatus::Optimal;
                    }
                }
                Step::Unbounded => return LpStatus::Unbounded,
                Step::Moved { degenerate } => {
                    degenerate_run = if degenerate { degenerate_run + 1 } else { 0 };
                }
            }
        }
    }

    /// Pricing only: reports whether any improving column remains.
    fn step_probe(&self, cost: &[f64]) -> Step {
        let tol = self.opts.optimality_tol;
        let y = self.duals(cost);
        for j in 0..self.cols.len() {
            if self.row_of[j] != NOT_BASIC || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(cost, &y, j);
            if (d < -tol && self.x[j] < self.upper[j]) || (d > tol && self.x[j] > self.lower[j]) {
                return Step::Moved { degenerate: false };
            }
        }
        Step::Optimal
    }
}

/// Solves an LP with the dense primal simplex.
pub fn solve(lp: &LpData, opts: &SimplexOptions) -> SimplexResult {
    let n = lp.num_vars();
    let fail = |status, iterations| SimplexResult {
        status,
        x: Vec::new(),
        objective: f64::NAN,
        iterations,
    };
    if lp.lower.iter().zip(&lp.upper).any(|(l, u)| l > u) {
        return fail(LpStatus::Infeasible, 0);
    }
    let mut t = Tableau::build(lp, *opts);
    let ncols = t.cols.len();

    let mut phase1 = vec![0.0; ncols];
    let mut need_phase1 = false;
    for i in 0..t.m {
        let a = t.first_artificial + i;
        if t.upper[a] > 0.0 {
            phase1[a] = 1.0;
            need_phase1 = true;
        }
    }
    if need_phase1 {
        match t.run(&phase1) {
            LpStatus::Optimal => {}
            LpStatus::Limit => return fail(LpStatus::Limit, t.iterations),
            _ => return fail(LpStatus::Infeasible, t.iterations),
        }
        let infeasibility: f64 = (t.first_artificial..ncols).map(|a| t.x[a].max(0.0)).sum();
        if infeasibility > 1e-7 {
            return fail(LpStatus::Infeasible, t.iterations);
        }
        for a in t.first_artificial..ncols {
            t.upper[a] = 0.0;
            if t.row_of[a] == NOT_BASIC {
                t.x[a] = 0.0;
            }
        }
    }
    let mut cost = lp.cost.clone();
    cost.resize(ncols, 0.0);
    let status = t.run(&cost);
    if status != LpStatus::Optimal {
        return fail(status, t.iterations);
    }
    let x: Vec<f64> = (0..n)
        .map(|j| t.x[j].clamp(lp.lower[j], lp.upper[j]))
        .collect();
    SimplexResult {
        objective: lp.objective(&x),
        x,
        status: LpStatus::Optimal,
        iterations: t.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::lp::LpRow;

    fn lp(cost: Vec<f64>, bounds: Vec<(f64, f64)>, rows: Vec<(Vec<(usize, f64)>, Sense, f64)>) -> LpData {
        LpData {
            cost,
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            rows: rows
                .into_iter()
                .map(|(terms, sense, rhs)| LpRow { terms, sense, rhs })
                .collect(),
            offset: 0.0,
        }
    }

    #[test]
    fn textbook_max_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
        let p = lp(
            vec![-3.0, -5.0],
            vec![(0.0, f64::INFINITY); 2],
            vec![
                (vec![(0, 1.0)], Sense::Le, 4.0),
                (vec![(1, 2.0)], Sense::Le, 12.0),
                (vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0),
            ],
        );
        let r = solve(&p, &SimplexOptions::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 36.0).abs() < 1e-9);
        assert!((r.x[0] - 2.0).abs() < 1e-9 && (r.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn bounds_and_equalities() {
        // min x - y, x + y = 1, x in [0.3, 1], y in [-1, 0.5]
        let p = lp(
            vec![1.0, -1.0],
            vec![(0.3, 1.0), (-1.0, 0.5)],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0)],
        );
        let r = solve(&p, &SimplexOptions::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x[0] - 0.5).abs() < 1e-9 && (r.x[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let p = lp(
            vec![1.0],
            vec![(0.0, 1.0)],
            vec![(vec![(0, 1.0)], Sense::Ge, 2.0)],
        );
        assert_eq!(solve(&p, &SimplexOptions::default()).status, LpStatus::Infeasible);
        let p = lp(vec![-1.0], vec![(0.0, f64::INFINITY)], vec![]);
        assert_eq!(solve(&p, &SimplexOptions::default()).status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables() {
        // min |x - 3| via epigraph, x free
        let p = lp(
            vec![0.0, 1.0],
            vec![(f64::NEG_INFINITY, f64::INFINITY), (0.0, f64::INFINITY)],
            vec![
                (vec![(1, 1.0), (0, -1.0)], Sense::Ge, -3.0),
                (vec![(1, 1.0), (0, 1.0)], Sense::Ge, 3.0),
            ],
        );
        let r = solve(&p, &SimplexOptions::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!(r.objective.abs() < 1e-9);
        assert!((r.x[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under naive Dantzig pricing.
        let p = lp(
            vec![-0.75, 150.0, -0.02, 6.0],
            vec![(0.0, f64::INFINITY); 4],
            vec![
                (vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Sense::Le, 0.0),
                (vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Sense::Le, 0.0),
                (vec![(2, 1.0)], Sense::Le, 1.0),
            ],
        );
        let r = solve(&p, &SimplexOptions::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 0.05).abs() < 1e-9);
    }
}
