//! Scores for reconstructions, the majority-vote baselines and the
//! two-proportion z-test.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::ReconstructionProblem;
use crate::phonology::{soundness_distance, FeatureSchema, FeatureVector, PhonemeInventory, NUM_FEATURES};

/// Distances below this count as equal, and soundness below it as sound.
pub const EXACT_TOL: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("expected {expected} vectors, got {found}")]
    IdMismatch { expected: usize, found: usize },
    #[error("pooled proportion is {0}; the z statistic is undefined")]
    DegeneratePool(f64),
    #[error("invalid proportion input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct EvalReport {
    pub avg_l1: Option<f64>,
    pub equal_rate: Option<f64>,
    pub n_truth: usize,
    pub sound_rate: f64,
    pub n_sound: usize,
    pub matching_rate: Option<f64>,
    pub avg_l2: Option<f64>,
    pub n_pairs: usize,
}

impl EvalReport {
    /// Tab-separated `metric value n` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\tn\n");
        let mut row = |name: &str, v: Option<f64>, n: usize| {
            if let Some(v) = v {
                out.push_str(&format!("{name}\t{v:.6}\t{n}\n"));
            }
        };
        row("avg_l1", self.avg_l1, self.n_truth);
        row("equal_rate", self.equal_rate, self.n_truth);
        row("sound_rate", Some(self.sound_rate), self.n_sound);
        row("matching_rate", self.matching_rate, self.n_pairs);
        row("avg_l2", self.avg_l2, self.n_pairs);
        out
    }
}

pub fn l1(a: &FeatureVector, b: &FeatureVector) -> f64 {
    a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).sum()
}

pub fn l2(a: &FeatureVector, b: &FeatureVector) -> f64 {
    a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_len(recon: &[FeatureVector], truth: &[FeatureVector]) -> Result<(), EvalError> {
    if recon.len() != truth.len() {
        return Err(EvalError::IdMismatch { expected: truth.len(), found: recon.len() });
    }
    Ok(())
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

pub fn avg_l1(recon: &[FeatureVector], truth: &[FeatureVector]) -> Result<f64, EvalError> {
    check_len(recon, truth)?;
    Ok(mean(recon.iter().zip(truth).map(|(a, b)| l1(a, b))))
}

pub fn equal_rate(recon: &[FeatureVector], truth: &[FeatureVector]) -> Result<f64, EvalError> {
    check_len(recon, truth)?;
    Ok(mean(recon.iter().zip(truth).map(|(a, b)| f64::from(u8::from(l1(a, b) < EXACT_TOL)))))
}

pub fn sound_rate(recon: &[FeatureVector]) -> f64 {
    let schema = FeatureSchema::standard();
    mean(recon.iter().map(|v| f64::from(u8::from(soundness_distance(v, schema) < EXACT_TOL))))
}

/// Fraction of pairs reconstructed to the same vector (L2 below tolerance),
/// and the mean L2 over pairs.
pub fn matching_rate(recon: &[FeatureVector], pairs: &[(usize, usize)]) -> Result<(f64, f64), EvalError> {
    if let Some(&(a, b)) = pairs.iter().find(|(a, b)| *a >= recon.len() || *b >= recon.len()) {
        return Err(EvalError::IdMismatch { expected: recon.len(), found: a.max(b) + 1 });
    }
    let d: Vec<f64> = pairs.iter().map(|&(a, b)| l2(&recon[a], &recon[b])).collect();
    Ok((mean(d.iter().map(|&x| f64::from(u8::from(x < EXACT_TOL)))), mean(d.iter().copied())))
}

/// Every statistic that the inputs allow.
pub fn evaluate(
    recon: &[FeatureVector],
    truth: Option<&[FeatureVector]>,
    pairs: Option<&[(usize, usize)]>,
) -> Result<EvalReport, EvalError> {
    let mut r = EvalReport { sound_rate: sound_rate(recon), n_sound: recon.len(), ..Default::default() };
    if let Some(t) = truth {
        r.avg_l1 = Some(avg_l1(recon, t)?);
        r.equal_rate = Some(equal_rate(recon, t)?);
        r.n_truth = t.len();
    }
    if let Some(p) = pairs {
        let (rate, avg) = matching_rate(recon, p)?;
        r.matching_rate = Some(rate);
        r.avg_l2 = Some(avg);
        r.n_pairs = p.len();
    }
    Ok(r)
}

/// Modal reading per entry. Ties go to the lexicographically smallest symbol;
/// entries without readings get the zero initial.
pub fn majority_vote_ipa(problem: &ReconstructionProblem) -> Vec<FeatureVector> {
    let inv = PhonemeInventory::ipa();
    problem
        .entries
        .iter()
        .map(|e| {
            let mut counts: BTreeMap<String, (usize, FeatureVector)> = BTreeMap::new();
            for r in e.readings.iter().flatten() {
                let key = inv.symbol_of(r).map_or_else(|| format!("{:?}", r.0), str::to_string);
                counts.entry(key).or_insert((0, *r)).0 += 1;
            }
            let mut best: Option<(usize, FeatureVector)> = None;
            for (n, v) in counts.into_values() {
                if best.is_none_or(|(b, _)| n > b) {
                    best = Some((n, v));
                }
            }
            best.map_or(FeatureVector::ZERO, |(_, v)| v)
        })
        .collect()
}

/// Coordinate-wise modal value per entry, ties to the smaller value. The
/// result need not be a valid phoneme.
pub fn majority_vote_feature(problem: &ReconstructionProblem) -> Vec<FeatureVector> {
    problem
        .entries
        .iter()
        .map(|e| {
            let mut out = FeatureVector::ZERO;
            for j in 0..NUM_FEATURES {
                let mut values: Vec<f64> = e.readings.iter().flatten().map(|r| r.0[j]).collect();
                values.sort_by(f64::total_cmp);
                let mut best = (0usize, 0.0);
                let mut i = 0;
                while i < values.len() {
                    let run = values[i..].iter().take_while(|&&x| x == values[i]).count();
                    if run > best.0 {
                        best = (run, values[i]);
                    }
                    i += run;
                }
                out.0[j] = best.1;
            }
            out
        })
        .collect()
}

/// Pooled two-proportion z statistic.
pub fn two_proportion_z(sr1: f64, n1: usize, sr2: f64, n2: usize) -> Result<f64, EvalError> {
    if n1 == 0 || n2 == 0 {
        return Err(EvalError::InvalidInput("sample sizes must be positive".into()));
    }
    if !(0.0..=1.0).contains(&sr1) || !(0.0..=1.0).contains(&sr2) {
        return Err(EvalError::InvalidInput(format!("rates {sr1}, {sr2} outside [0, 1]")));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (sr1 * n1f + sr2 * n2f) / (n1f + n2f);
    if pooled <= 0.0 || pooled >= 1.0 {
        return Err(EvalError::DegeneratePool(pooled));
    }
    Ok((sr1 - sr2) / (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt())
}

/// Like [`two_proportion_z`] but maps a degenerate pool to a signed infinity
/// (or zero when the rates agree), logging a warning.
pub fn two_proportion_z_lenient(sr1: f64, n1: usize, sr2: f64, n2: usize) -> Result<f64, EvalError> {
    match two_proportion_z(sr1, n1, sr2, n2) {
        Err(EvalError::DegeneratePool(p)) => {
            log::warn!("degenerate pooled proportion {p}; z reported as a signed infinity");
            Ok(if sr1 == sr2 { 0.0 } else { f64::INFINITY.copysign(sr1 - sr2) })
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::Entry;
    use crate::phonology::parse_phoneme;

    fn ph(s: &str) -> FeatureVector {
        parse_phoneme(s, FeatureSchema::standard()).unwrap()
    }

    fn problem(readings: &[&[&str]]) -> ReconstructionProblem {
        let entries = readings
            .iter()
            .enumerate()
            .map(|(i, rs)| Entry::new(format!("e{i}"), rs.iter().map(|s| Some(ph(s))).collect()))
            .collect();
        let vars = (0..readings[0].len()).map(|i| format!("v{i}")).collect();
        ReconstructionProblem::new(vars, entries, &[], 0.0, 1.0).unwrap()
    }

    #[test]
    fn identical_reconstruction() {
        let t: Vec<_> = ["p", "m", "s"].iter().map(|s| ph(s)).collect();
        assert_eq!(equal_rate(&t, &t).unwrap(), 1.0);
        assert_eq!(avg_l1(&t, &t).unwrap(), 0.0);
        assert_eq!(sound_rate(&t), 1.0);
    }

    #[test]
    fn one_perturbed_of_ten() {
        let t: Vec<_> = (0..10).map(|_| ph("t")).collect();
        let mut r = t.clone();
        r[3].0[0] += 0.5;
        assert!((equal_rate(&r, &t).unwrap() - 0.9).abs() < 1e-12);
        assert!((avg_l1(&r, &t).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(equal_rate(&[ph("p")], &[]), Err(EvalError::IdMismatch { .. })));
    }

    #[test]
    fn worked_unsound_among_ten() {
        let mut v = FeatureVector::ZERO;
        v.0[2] = 1.048;
        v.0[1] = 0.905;
        let mut r: Vec<_> = (0..10).map(|_| ph("k")).collect();
        r.push(v);
        assert!((sound_rate(&r) - 10.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn matching_examples() {
        let a = FeatureVector::ZERO;
        let mut b = a;
        b.0[5] = 1.0;
        assert_eq!(matching_rate(&[a, a], &[(0, 1)]).unwrap(), (1.0, 0.0));
        assert_eq!(matching_rate(&[a, a, b], &[(0, 1), (1, 2)]).unwrap(), (0.5, 0.5));
        assert!(matching_rate(&[a], &[(0, 3)]).is_err());
    }

    #[test]
    fn ipa_vote_mode_and_ties() {
        let p = problem(&[&["p", "p", "b"], &["s", "m", "k"]]);
        let v = majority_vote_ipa(&p);
        assert_eq!(v[0], ph("p"));
        assert_eq!(v[1], ph("k"));
    }

    #[test]
    fn feature_vote_can_be_unsound() {
        let p = problem(&[&["p", "b", "m"]]);
        let v = majority_vote_feature(&p);
        assert_eq!(v[0].0[3], 1.0);
        let schema = FeatureSchema::standard();
        let found = (0..200).any(|seed| {
            let d = crate::synthgen::generate(&crate::synthgen::GenerationConfig {
                m_range: (5, 5),
                n_range: (2, 2),
                num_varieties: 3,
                p_dia: 0.6,
                p_char: 0.6,
                seed,
                ..Default::default()
            })
            .unwrap();
            let pr = d.to_problem(0.5, 1.0).unwrap();
            majority_vote_feature(&pr).iter().any(|v| soundness_distance(v, schema) > 0.0)
        });
        assert!(found);
    }

    #[test]
    fn z_examples() {
        assert!((two_proportion_z(1.0, 1078, 0.9733, 3138).unwrap() - 5.4191).abs() < 1e-3);
        assert!((two_proportion_z(0.9826, 1037, 0.9731, 3158).unwrap() - 1.7152).abs() < 1e-3);
        assert_eq!(two_proportion_z(0.5, 10, 0.5, 20).unwrap(), 0.0);
        assert!(matches!(two_proportion_z(1.0, 5, 1.0, 5), Err(EvalError::DegeneratePool(_))));
        assert_eq!(two_proportion_z_lenient(1.0, 5, 1.0, 5).unwrap(), 0.0);
    }

    #[test]
    fn report_tsv() {
        let t = vec![ph("p"), ph("m")];
        let r = evaluate(&t, Some(&t), Some(&[(0, 1)])).unwrap();
        assert_eq!(r.equal_rate, Some(1.0));
        assert_eq!(r.matching_rate, Some(0.0));
        assert!(r.to_tsv().starts_with("metric\tvalue\tn\navg_l1\t0.000000\t2\n"));
    }

    proptest::proptest! {
        #[test]
        fn z_antisymmetric(a in 0.01f64..0.99, b in 0.01f64..0.99, n1 in 1usize..5000, n2 in 1usize..5000) {
            let z1 = two_proportion_z(a, n1, b, n2).unwrap();
            let z2 = two_proportion_z(b, n2, a, n1).unwrap();
            proptest::prop_assert!((z1 + z2).abs() < 1e-9);
        }
    }
}
