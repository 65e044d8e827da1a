//! Translation of a [`ReconstructionProblem`] into a [`MilpModel`].
//!
//! Every entry gets 14 bounded feature variables plus binaries that keep its
//! dependent features consistent with their governors. Every distance term of
//! the objective is linearised per feature group (an I-feature together with
//! the D-features it governs):
//!
//! * I-feature `k`: epigraph `t_k >= |Δ_k|`.
//! * Governor `τ`: indicator `ĉ` with `t_τ <= 1/2 + M·ĉ`, so `ĉ = 1` whenever
//!   the governors differ by more than one half.
//! * D-feature `j`: `g_j = s_j·ĉ + u_j` with `u_j >= |Δ_j| − s_j·ĉ`. In the
//!   `ĉ = 0` region the product `c·f` is additionally bounded by its McCormick
//!   envelope, `u_j >= |Δ_j|/2 + s_j·t_τ − K·ĉ`.
//!
//! All surrogate variables carry positive objective weight, so every epigraph
//! is tight at an optimum. Readings of one entry that agree on a whole group
//! are merged into one weighted term.

use thiserror::Error;

use super::model::{MilpModel, Sense, VarId, VarRole};
use super::problem::{ProblemError, ReconstructionProblem};
use crate::phonology::{Feature, FeatureGroup, FeatureSchema, FeatureVector, Gate, NUM_FEATURES};

/// Big-M parameters for indicator rows.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BigMConfig {
    /// Upper limit on any big-M coefficient. Must dominate the feature spans.
    pub big_m: f64,
    /// Strictness margin for `> 1/2` tests.
    pub epsilon: f64,
    /// Use the smallest valid M for every row instead of `big_m` everywhere.
    pub tighten: bool,
}

impl Default for BigMConfig {
    fn default() -> Self {
        BigMConfig {
            big_m: 10.0,
            epsilon: 1e-3,
            tighten: true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("big-M {given} is below the {required} required by row {row}")]
    BigMTooSmall { given: f64, required: f64, row: String },
    #[error("epsilon {0} must lie in (0, 0.5)")]
    BadEpsilon(f64),
}

/// A built model plus the feature variables of every entry.
#[derive(Clone, Debug)]
pub struct ReconstructionModel {
    pub model: MilpModel,
    pub features: Vec<[VarId; NUM_FEATURES]>,
}

impl ReconstructionModel {
    /// Feature vectors of a solution, one per entry.
    pub fn vectors(&self, x: &[f64]) -> Vec<FeatureVector> {
        self.features
            .iter()
            .map(|vars| {
                let mut v = FeatureVector::ZERO;
                for (slot, var) in v.0.iter_mut().zip(vars) {
                    *slot = x[var.0];
                }
                v
            })
            .collect()
    }
}

/// Linear expression `Σ a·x + constant`.
#[derive(Clone, Debug, Default)]
struct Lin {
    terms: Vec<(VarId, f64)>,
    constant: f64,
}

impl Lin {
    fn scaled(&self, k: f64) -> Lin {
        Lin {
            terms: self.terms.iter().map(|&(v, a)| (v, a * k)).collect(),
            constant: self.constant * k,
        }
    }
}

/// The other side of a distance term.
#[derive(Clone, Copy)]
enum Other<'a> {
    Entry(&'a [VarId; NUM_FEATURES]),
    Reading(&'a FeatureVector),
}

struct Builder<'a> {
    schema: &'a FeatureSchema,
    cfg: BigMConfig,
    model: MilpModel,
    features: Vec<[VarId; NUM_FEATURES]>,
}

impl<'a> Builder<'a> {
    /// Coefficient for a big-M row: the tight value or the configured cap.
    fn m(&self, required: f64, row: &str) -> Result<f64, BuildError> {
        if self.cfg.tighten {
            Ok(required.min(self.cfg.big_m.max(required)))
        } else if self.cfg.big_m + 1e-12 < required {
            Err(BuildError::BigMTooSmall {
                given: self.cfg.big_m,
                required,
                row: row.to_string(),
            })
        } else {
            Ok(self.cfg.big_m)
        }
    }

    /// Adds `Σ terms + lin >= rhs` style rows with the constant moved over.
    fn row(&mut self, name: String, mut terms: Vec<(VarId, f64)>, lin: &Lin, sense: Sense, rhs: f64) {
        terms.extend_from_slice(&lin.terms);
        self.model.add_constraint(name, &terms, sense, rhs - lin.constant);
    }

    fn add_entry(&mut self, e: usize, groups: &[FeatureGroup]) -> Result<(), BuildError> {
        let schema = self.schema;
        let active = |f: Feature| groups.iter().any(|g| g.members().any(|m| m == f));
        let mut vars = [VarId(0); NUM_FEATURES];
        for d in schema.features() {
            // Features outside the modelled groups are pinned to zero.
            let (lo, hi) = if active(d.feature) { (d.min, d.max) } else { (0.0, 0.0) };
            vars[d.feature.index()] = self.model.add_continuous(
                format!("F{e}_{}", d.feature.short()),
                lo,
                hi,
                VarRole::Feature { entry: e, feature: d.feature },
            );
        }
        self.features.push(vars);

        let eps = self.cfg.epsilon;
        let mut governor_binary: Vec<(Feature, VarId)> = Vec::new();
        for dep in schema.dependent().filter(|d| active(d.feature)) {
            let (j, gov, gate) = match dep.kind {
                crate::phonology::FeatureKind::Dependent { governor, gate } => (dep.feature, governor, gate),
                crate::phonology::FeatureKind::Independent => unreachable!(),
            };
            let (fj, fg) = (vars[j.index()], vars[gov.index()]);
            let gd = schema.descriptor(gov);
            match gate {
                Gate::SonorityWindow => {
                    // |F_j| <= max(0, min(F_g, 2 - F_g)) with one binary:
                    // w = 1 opens the window, w = 0 pins F_j to 0.
                    let w = self.model.add_binary(format!("w{e}_{}", j.short()), VarRole::Consistency { entry: e });
                    for (sign, tag) in [(1.0, "p"), (-1.0, "n")] {
                        let reach = if sign > 0.0 { dep.max } else { -dep.min };
                        let name = format!("win{e}_{}_{tag}", j.short());
                        // sign·F_j <= F_g + M(1 - w)
                        let m1 = self.m(reach - gd.min, &name)?;
                        self.model.add_constraint(
                            format!("{name}1"),
                            &[(fj, sign), (fg, -1.0), (w, m1)],
                            Sense::Le,
                            m1,
                        );
                        // sign·F_j <= 2 - F_g + M(1 - w)
                        let m2 = self.m(reach + gd.max - 2.0, &name)?;
                        self.model.add_constraint(
                            format!("{name}2"),
                            &[(fj, sign), (fg, 1.0), (w, m2)],
                            Sense::Le,
                            2.0 + m2,
                        );
                        // sign·F_j <= M·w
                        let m3 = self.m(reach, &name)?;
                        self.model
                            .add_constraint(format!("{name}3"), &[(fj, sign), (w, -m3)], Sense::Le, 0.0);
                    }
                }
                Gate::Graded | Gate::Signed => {
                    let b = match governor_binary.iter().find(|(g, _)| *g == gov) {
                        Some(&(_, b)) => b,
                        None => {
                            let b = self
                                .model
                                .add_binary(format!("b{e}_{}", gov.short()), VarRole::Consistency { entry: e });
                            let name = format!("gate{e}_{}", gov.short());
                            // F_g >= 1/2 + eps - M(1 - b)
                            let m1 = self.m(0.5 + eps - gd.min, &name)?;
                            self.model.add_constraint(
                                format!("{name}_on"),
                                &[(fg, 1.0), (b, -m1)],
                                Sense::Ge,
                                0.5 + eps - m1,
                            );
                            // F_g <= 1/2 + M·b
                            let m2 = self.m(gd.max - 0.5, &name)?;
                            self.model
                                .add_constraint(format!("{name}_off"), &[(fg, 1.0), (b, -m2)], Sense::Le, 0.5);
                            governor_binary.push((gov, b));
                            b
                        }
                    };
                    if gate == Gate::Graded {
                        // b = 0 => F_j = 0; b = 1 => F_j >= 1.
                        let name = format!("grade{e}_{}", j.short());
                        let m = self.m(dep.max, &name)?;
                        self.model
                            .add_constraint(format!("{name}_lo"), &[(fj, 1.0), (b, -1.0)], Sense::Ge, 0.0);
                        self.model
                            .add_constraint(format!("{name}_hi"), &[(fj, 1.0), (b, -m)], Sense::Le, 0.0);
                    } else {
                        // F_j = p - n, p + n = b: |F_j| equals the governor bit.
                        let p = self.model.add_binary(format!("p{e}_{}", j.short()), VarRole::Consistency { entry: e });
                        let n = self.model.add_binary(format!("n{e}_{}", j.short()), VarRole::Consistency { entry: e });
                        self.model.add_constraint(
                            format!("sgn{e}_{}", j.short()),
                            &[(fj, 1.0), (p, -1.0), (n, 1.0)],
                            Sense::Eq,
                            0.0,
                        );
                        self.model.add_constraint(
                            format!("mag{e}_{}", j.short()),
                            &[(p, 1.0), (n, 1.0), (b, -1.0)],
                            Sense::Eq,
                            0.0,
                        );
                    }
                }
            }
        }
        Ok(())
    }

    /// `X_f − Y_f` as a linear expression.
    fn delta(&self, x: &[VarId; NUM_FEATURES], other: Other<'_>, f: Feature) -> Lin {
        let i = f.index();
        match other {
            Other::Entry(y) => Lin {
                terms: vec![(x[i], 1.0), (y[i], -1.0)],
                constant: 0.0,
            },
            Other::Reading(r) => Lin {
                terms: vec![(x[i], 1.0)],
                constant: -r[i],
            },
        }
    }

    /// Adds `t >= |Δ|` with `t` bounded by the feature span.
    fn epigraph(&mut self, tag: &str, f: Feature, delta: &Lin, weight: f64) -> VarId {
        let span = self.schema.descriptor(f).span();
        let t = self
            .model
            .add_continuous(format!("t_{tag}_{}", f.short()), 0.0, span, VarRole::Distance);
        self.model.add_objective(t, weight);
        self.row(format!("{tag}_{}_p", f.short()), vec![(t, 1.0)], &delta.scaled(-1.0), Sense::Ge, 0.0);
        self.row(format!("{tag}_{}_n", f.short()), vec![(t, 1.0)], delta, Sense::Ge, 0.0);
        t
    }

    fn add_group_term(
        &mut self,
        tag: &str,
        group: &FeatureGroup,
        x: &[VarId; NUM_FEATURES],
        other: Other<'_>,
        weight: f64,
    ) -> Result<(), BuildError> {
        let dg = self.delta(x, other, group.head);
        let t = self.epigraph(tag, group.head, &dg, weight);
        if group.dependents.is_empty() {
            return Ok(());
        }
        let head = self.schema.descriptor(group.head);
        let c = self
            .model
            .add_binary(format!("c_{tag}_{}", group.head.short()), VarRole::GateIndicator);
        let link = format!("{tag}_{}_link", group.head.short());
        let mc = self.m(head.span() - 0.5, &link)?;
        self.model.add_constraint(link, &[(t, 1.0), (c, -mc)], Sense::Le, 0.5);
        for &j in &group.dependents {
            let s = self.schema.descriptor(j).supremum;
            let dj = self.delta(x, other, j);
            let u = self
                .model
                .add_continuous(format!("u_{tag}_{}", j.short()), 0.0, s, VarRole::Distance);
            self.model.add_objective(u, weight);
            self.model.add_objective(c, weight * s);
            let name = format!("{tag}_{}", j.short());
            // u + s·ĉ >= ±Δ_j
            self.row(format!("{name}_p"), vec![(u, 1.0), (c, s)], &dj.scaled(-1.0), Sense::Ge, 0.0);
            self.row(format!("{name}_n"), vec![(u, 1.0), (c, s)], &dj, Sense::Ge, 0.0);
            // u - s·t + K·ĉ >= ±Δ_j / 2; slack whenever ĉ = 1.
            let k = 0.5 * s + s * head.span();
            self.row(
                format!("{name}_mp"),
                vec![(u, 1.0), (t, -s), (c, k)],
                &dj.scaled(-0.5),
                Sense::Ge,
                0.0,
            );
            self.row(
                format!("{name}_mn"),
                vec![(u, 1.0), (t, -s), (c, k)],
                &dj.scaled(0.5),
                Sense::Ge,
                0.0,
            );
        }
        Ok(())
    }
}

/// Builds the model. Pair terms are dropped when `lambda_fq = 0`.
pub fn build_model(problem: &ReconstructionProblem, cfg: &BigMConfig) -> Result<ReconstructionModel, BuildError> {
    build_model_with_schema(problem, cfg, FeatureSchema::standard())
}

pub fn build_model_with_schema(
    problem: &ReconstructionProblem,
    cfg: &BigMConfig,
    schema: &FeatureSchema,
) -> Result<ReconstructionModel, BuildError> {
    build_inner(problem, cfg, schema, &schema.groups())
}

/// Builds the part of the model that belongs to one feature group; every
/// other feature is fixed at zero. Groups share no variables, rows or
/// objective terms, so the full optimum is the union of the group optima.
pub fn build_group_model(
    problem: &ReconstructionProblem,
    cfg: &BigMConfig,
    group: &FeatureGroup,
) -> Result<ReconstructionModel, BuildError> {
    build_inner(problem, cfg, FeatureSchema::standard(), std::slice::from_ref(group))
}

fn build_inner(
    problem: &ReconstructionProblem,
    cfg: &BigMConfig,
    schema: &FeatureSchema,
    groups: &[FeatureGroup],
) -> Result<ReconstructionModel, BuildError> {
    problem.validate()?;
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 0.5) {
        return Err(BuildError::BadEpsilon(cfg.epsilon));
    }
    let mut b = Builder {
        schema,
        cfg: *cfg,
        model: MilpModel::new(),
        features: Vec::with_capacity(problem.entries.len()),
    };
    for e in 0..problem.entries.len() {
        b.add_entry(e, groups)?;
    }
    let lambda = problem.lambda_fq;

    if lambda > 0.0 {
        for (i, pair) in problem.pairs.iter().enumerate() {
            let w = lambda * problem.pair_weight(pair);
            let (x, y) = (b.features[pair.x], b.features[pair.xu]);
            for g in groups {
                b.add_group_term(&format!("p{i}"), g, &x, Other::Entry(&y), w)?;
            }
        }
    }

    for (e, entry) in problem.entries.iter().enumerate() {
        let x = b.features[e];
        for g in groups {
            for (a, (r, mult)) in aggregate_readings(entry.readings.iter().flatten(), g).into_iter().enumerate() {
                let tag = format!("r{e}_{}{a}", g.head.short());
                b.add_group_term(&tag, g, &x, Other::Reading(&r), (1.0 - lambda) * mult)?;
            }
        }
    }

    Ok(ReconstructionModel {
        model: b.model,
        features: b.features,
    })
}

/// Builds the model with every entry restricted to one of `candidates`:
/// binaries `z_ek` with `Σ_k z_ek = 1` and `F_e = Σ_k z_ek·v_k`. Used to compare
/// the solver against exhaustive enumeration over the same candidate set.
pub fn build_restricted_model(
    problem: &ReconstructionProblem,
    cfg: &BigMConfig,
    candidates: &[FeatureVector],
) -> Result<ReconstructionModel, BuildError> {
    let mut rm = build_model(problem, cfg)?;
    for (e, vars) in rm.features.clone().iter().enumerate() {
        let z: Vec<VarId> = (0..candidates.len())
            .map(|k| rm.model.add_binary(format!("z{e}_{k}"), VarRole::Other))
            .collect();
        let one: Vec<(VarId, f64)> = z.iter().map(|&v| (v, 1.0)).collect();
        rm.model.add_constraint(format!("pick{e}"), &one, Sense::Eq, 1.0);
        for (j, &fj) in vars.iter().enumerate() {
            let mut terms = vec![(fj, 1.0)];
            terms.extend(z.iter().zip(candidates).map(|(&v, c)| (v, -c.0[j])));
            rm.model
                .add_constraint(format!("pick{e}_{}", Feature::ALL[j].short()), &terms, Sense::Eq, 0.0);
        }
    }
    Ok(rm)
}

/// Distinct projections of the readings onto a group, with multiplicities,
/// in first-seen order.
fn aggregate_readings<'r>(readings: impl Iterator<Item = &'r FeatureVector>, g: &FeatureGroup) -> Vec<(FeatureVector, f64)> {
    let mut out: Vec<(FeatureVector, f64)> = Vec::new();
    let feats: Vec<usize> = std::iter::once(g.head).chain(g.dependents.iter().copied()).map(Feature::index).collect();
    for r in readings {
        match out
            .iter_mut()
            .find(|(v, _)| feats.iter().all(|&i| v[i].to_bits() == r[i].to_bits()))
        {
            Some(slot) => slot.1 += 1.0,
            None => out.push((*r, 1.0)),
        }
    }
    out
}

/// Completes a full variable assignment from entry vectors: consistency
/// binaries follow the vectors and every surrogate sits at its tightest value.
/// The result is feasible whenever every vector is a sound phoneme encoding.
pub fn assignment_from_vectors(rm: &ReconstructionModel, vectors: &[FeatureVector]) -> Vec<f64> {
    let schema = FeatureSchema::standard();
    let model = &rm.model;
    let mut x = vec![0.0; model.num_vars()];
    let mut by_name = std::collections::HashMap::with_capacity(model.num_vars());
    for (i, v) in model.variables.iter().enumerate() {
        by_name.insert(v.name.as_str(), i);
    }
    for (e, vars) in rm.features.iter().enumerate() {
        for (f, var) in vars.iter().enumerate() {
            let v = &model.variables[var.0];
            x[var.0] = vectors[e].0[f].clamp(v.lower, v.upper);
        }
    }
    let value_of = |x: &[f64], e: usize, f: Feature| x[rm.features[e][f.index()].0];
    // Entry consistency binaries.
    for (i, var) in model.variables.iter().enumerate() {
        if let VarRole::Consistency { entry } = var.role {
            let short = &var.name[var.name.find('_').map_or(0, |p| p + 1)..];
            let f = Feature::ALL.iter().copied().find(|f| f.short() == short).expect("feature suffix");
            let val = value_of(&x, entry, f);
            x[i] = match var.name.as_bytes()[0] {
                b'w' => f64::from(val != 0.0),
                b'b' => f64::from(val > 0.5),
                b'p' => f64::from(val > 0.5),
                b'n' => f64::from(val < -0.5),
                _ => 0.0,
            };
        }
    }
    // Distance terms: recompute every delta from the row definitions.
    // t rows are `t - Δ >= 0` / `t + Δ >= 0`, so t = |Δ| where Δ is read off
    // the `_n` row (t + Δ >= 0 with rhs = -constant).
    let row_index: std::collections::HashMap<&str, usize> =
        model.constraints.iter().enumerate().map(|(i, c)| (c.name.as_str(), i)).collect();
    let delta_of = |x: &[f64], row: &str, skip: &[usize]| -> f64 {
        let c = &model.constraints[row_index[row]];
        // activity of the Δ part plus its constant (rhs = -constant).
        c.terms
            .iter()
            .filter(|(v, _)| !skip.contains(&v.0))
            .map(|&(v, a)| a * x[v.0])
            .sum::<f64>()
            - c.rhs
    };
    for (i, var) in model.variables.iter().enumerate() {
        if var.role == VarRole::Distance && var.name.starts_with("t_") {
            let rest = &var.name[2..];
            x[i] = delta_of(&x, &format!("{rest}_n"), &[i]).abs();
        }
    }
    for (i, var) in model.variables.iter().enumerate() {
        if var.role == VarRole::GateIndicator {
            let t = by_name[format!("t_{}", &var.name[2..]).as_str()];
            x[i] = f64::from(x[t] > 0.5);
        }
    }
    for (i, var) in model.variables.iter().enumerate() {
        if var.role == VarRole::Distance && var.name.starts_with("u_") {
            let rest = &var.name[2..];
            let (tag, jshort) = rest.rsplit_once('_').expect("u name");
            let j = Feature::ALL.iter().copied().find(|f| f.short() == jshort).expect("feature");
            let gov = schema.descriptor(j).governor().expect("dependent");
            let s = schema.descriptor(j).supremum;
            let t = x[by_name[format!("t_{tag}_{}", gov.short()).as_str()]];
            let c = x[by_name[format!("c_{tag}_{}", gov.short()).as_str()]];
            let c_var = by_name[format!("c_{tag}_{}", gov.short()).as_str()];
            let d = delta_of(&x, &format!("{rest}_n"), &[i, c_var]).abs();
            x[i] = if c > 0.5 {
                (d - s).max(0.0)
            } else {
                d.max(0.5 * d + s * t).min(s)
            };
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::problem::Entry;
    use crate::phonology::{parse_phoneme, PhonemeInventory};

    fn ph(s: &str) -> FeatureVector {
        parse_phoneme(s, FeatureSchema::standard()).unwrap()
    }

    fn problem(readings: &[&[&str]], pairs: &[(usize, usize)]) -> ReconstructionProblem {
        let nv = readings.iter().map(|r| r.len()).max().unwrap_or(0);
        let entries = readings
            .iter()
            .enumerate()
            .map(|(i, rs)| Entry::new(format!("c{i}"), rs.iter().map(|s| Some(ph(s))).collect()))
            .collect();
        let pairs: Vec<_> = pairs.iter().map(|&(a, b)| (format!("c{a}"), format!("c{b}"))).collect();
        ReconstructionProblem::new((0..nv).map(|v| format!("v{v}")).collect(), entries, &pairs, 0.5, 1.0).unwrap()
    }

    #[test]
    fn every_entry_has_fourteen_bounded_features() {
        let p = problem(&[&["f", "m"], &["p", "p"]], &[(0, 1)]);
        let rm = build_model(&p, &BigMConfig::default()).unwrap();
        rm.model.validate().unwrap();
        for vars in &rm.features {
            for (j, v) in vars.iter().enumerate() {
                let var = &rm.model.variables[v.0];
                let d = &FeatureSchema::standard().features()[j];
                assert_eq!((var.lower, var.upper), (d.min, d.max));
            }
        }
    }

    #[test]
    fn surrogate_coefficients_are_positive() {
        let p = problem(&[&["f", "m"], &["p", "tʰ"]], &[(0, 1)]);
        let rm = build_model(&p, &BigMConfig::default()).unwrap();
        for (v, c) in rm.model.variables.iter().zip(&rm.model.objective) {
            match v.role {
                VarRole::Distance | VarRole::GateIndicator => assert!(*c > 0.0, "{}", v.name),
                _ => assert_eq!(*c, 0.0, "{}", v.name),
            }
        }
    }

    #[test]
    fn inventory_assignments_are_feasible_and_exact() {
        let inv: Vec<_> = PhonemeInventory::ipa().iter().map(|(_, v)| *v).collect();
        let p = problem(&[&["f", "m", "kʷʰ"], &["p", "ɕ", ""], &["ɥ", "l", "ʈʂ"]], &[(0, 1), (2, 1)]);
        let rm = build_model(&p, &BigMConfig::default()).unwrap();
        for k in (0..inv.len()).step_by(7) {
            let vectors = vec![inv[k], inv[(k * 13 + 5) % inv.len()], inv[(k * 29 + 3) % inv.len()]];
            let x = assignment_from_vectors(&rm, &vectors);
            assert!(rm.model.max_violation(&x) < 1e-9, "assignment {k} infeasible");
            let surrogate = rm.model.objective_value(&x);
            let exact = p.exact_objective(&vectors);
            assert!((surrogate - exact).abs() < 1e-9, "{surrogate} vs {exact}");
        }
    }

    #[test]
    fn untightened_rows_use_the_cap() {
        let p = problem(&[&["f"]], &[]);
        let cfg = BigMConfig {
            tighten: false,
            ..BigMConfig::default()
        };
        let rm = build_model(&p, &cfg).unwrap();
        let row = rm.model.constraints.iter().find(|c| c.name == "gate0_dor_off").unwrap();
        assert!(row.terms.iter().any(|&(_, a)| a == -10.0));
        let small = BigMConfig {
            big_m: 1.0,
            ..cfg
        };
        assert!(matches!(build_model(&p, &small), Err(BuildError::BigMTooSmall { .. })));
    }

    #[test]
    fn identical_readings_are_merged() {
        let p = problem(&[&["p", "p", "p"]], &[]);
        let rm = build_model(&p, &BigMConfig::default()).unwrap();
        let t = rm.model.var_by_name("t_r0_cont0_cont").unwrap();
        assert_eq!(rm.model.objective[t.0], 1.5);
        assert!(rm.model.var_by_name("t_r0_cont1_cont").is_none());
    }

    #[test]
    fn size_is_linear() {
        let one = build_model(&problem(&[&["p", "m"]], &[]), &BigMConfig::default()).unwrap();
        let two = build_model(&problem(&[&["p", "m"], &["p", "m"]], &[]), &BigMConfig::default()).unwrap();
        assert_eq!(two.model.num_vars(), 2 * one.model.num_vars());
        assert_eq!(two.model.num_constraints(), 2 * one.model.num_constraints());
    }
}
