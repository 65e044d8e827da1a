//! Local repair of reconstructed vectors towards valid feature combinations.

use crate::metric::Metric;
use crate::milp::ReconstructionProblem;
use crate::phonology::{Feature, FeatureSchema, FeatureVector};

const TOL: f64 = 1e-9;

/// Coordinate descent over feature groups. Each entry's group is replaced by
/// the cheapest valid combination given the current neighbours whenever that
/// lowers the exact objective, or keeps it while turning an invalid group
/// valid (every member at a listed combination). The exact objective never increases. Returns the number of
/// replacements made.
pub fn polish(problem: &ReconstructionProblem, vectors: &mut [FeatureVector]) -> usize {
    let schema = FeatureSchema::standard();
    let metric = Metric::default();
    let lambda = problem.lambda_fq;
    let n = problem.entries.len();
    let mut neighbours: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    if lambda > 0.0 {
        for p in &problem.pairs {
            let w = lambda * problem.pair_weight(p);
            neighbours[p.x].push((p.xu, w));
            neighbours[p.xu].push((p.x, w));
        }
    }
    let groups: Vec<(Vec<usize>, Vec<Vec<f64>>)> = schema
        .groups()
        .iter()
        .map(|g| (g.members().map(Feature::index).collect(), schema.valid_tuples(g)))
        .collect();
    let on_grid = |v: &FeatureVector, members: &[usize], tuples: &[Vec<f64>]| {
        tuples.iter().any(|t| members.iter().zip(t).all(|(&i, &x)| (v.0[i] - x).abs() < TOL))
    };
    let mut changed = 0;
    for _pass in 0..8 {
        let mut pass_changed = 0;
        for e in 0..n {
            for (members, tuples) in &groups {
                let cost = |v: &FeatureVector| {
                    let local = |a: &FeatureVector, b: &FeatureVector| members.iter().map(|&f| metric.term(a, b, f)).sum::<f64>();
                    let mut c = (1.0 - lambda) * problem.entries[e].readings.iter().flatten().map(|r| local(v, r)).sum::<f64>();
                    for &(o, w) in &neighbours[e] {
                        c += w * local(v, &vectors[o]);
                    }
                    c
                };
                let current = vectors[e];
                let current_cost = cost(&current);
                let current_valid = on_grid(&current, members, tuples);
                let mut best: Option<(f64, FeatureVector)> = None;
                for t in tuples {
                    let mut v = current;
                    for (&i, &x) in members.iter().zip(t) {
                        v.0[i] = x;
                    }
                    let c = cost(&v);
                    if best.as_ref().is_none_or(|(b, _)| c < b - TOL) {
                        best = Some((c, v));
                    }
                }
                let Some((c, v)) = best else { continue };
                let improves = c < current_cost - TOL;
                let repairs = !current_valid && c <= current_cost + TOL;
                if (improves || repairs) && v != current {
                    vectors[e] = v;
                    pass_changed += 1;
                }
            }
        }
        changed += pass_changed;
        if pass_changed == 0 {
            break;
        }
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::Entry;
    use crate::phonology::{parse_phoneme, soundness_distance};

    fn ph(s: &str) -> FeatureVector {
        parse_phoneme(s, FeatureSchema::standard()).unwrap()
    }

    fn problem(readings: &[&[&str]], pairs: &[(&str, &str)], lambda: f64) -> ReconstructionProblem {
        let entries = readings
            .iter()
            .enumerate()
            .map(|(i, rs)| Entry::new(format!("e{i}"), rs.iter().map(|s| Some(ph(s))).collect()))
            .collect();
        let pairs: Vec<(String, String)> = pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        ReconstructionProblem::new(vec!["a".into(), "b".into()], entries, &pairs, lambda, 1.0).unwrap()
    }

    #[test]
    fn repairs_fractional_governor_without_cost() {
        let p = problem(&[&["t", "p"]], &[], 0.0);
        let mut v = ph("t");
        v[Feature::Coronal] = 0.7;
        let before = p.exact_objective(&[v]);
        let mut vs = [v];
        polish(&p, &mut vs);
        assert!(p.exact_objective(&vs) <= before + 1e-12);
        assert_eq!(soundness_distance(&vs[0], FeatureSchema::standard()), 0.0);
    }

    #[test]
    fn never_increases_objective() {
        let p = problem(&[&["p", "b"], &["m", "f"], &["k", "x"]], &[("e0", "e1"), ("e1", "e2")], 0.5);
        let mut vs = vec![ph("s"), ph("ŋ"), ph("p")];
        let before = p.exact_objective(&vs);
        polish(&p, &mut vs);
        assert!(p.exact_objective(&vs) <= before);
        assert!(vs.iter().all(|v| soundness_distance(v, FeatureSchema::standard()) == 0.0));
    }
}
