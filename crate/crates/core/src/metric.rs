//! Feature-space distance with dependent-feature gating.
//!
//! I-features contribute `f(x, y)` directly. A D-feature `j` with governor
//! `τ(j)` contributes `c·s_j + (1 − c)·f(x_j, y_j)` where
//! `c = min(f(x_τ, y_τ), 1)`: once the governors disagree, the dependent
//! feature counts as maximally different.

use crate::phonology::{FeatureSchema, FeatureVector, NUM_FEATURES};

/// Base distance on a single coordinate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseDistance {
    /// `|x − y|`.
    #[default]
    Absolute,
    /// `0` when equal, `1` otherwise.
    Discrete,
}

impl BaseDistance {
    #[inline]
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            BaseDistance::Absolute => (x - y).abs(),
            BaseDistance::Discrete => {
                if x == y {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Supremum of the base distance over a closed interval.
    pub fn supremum(self, min: f64, max: f64) -> f64 {
        match self {
            BaseDistance::Absolute => max - min,
            BaseDistance::Discrete => {
                if max > min {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// The feature metric `d`, precomputed from a schema.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    base: BaseDistance,
    /// Governor index for D-features.
    governor: [Option<usize>; NUM_FEATURES],
    supremum: [f64; NUM_FEATURES],
}

impl Default for Metric {
    fn default() -> Self {
        Metric::new(FeatureSchema::standard(), BaseDistance::Absolute)
    }
}

impl Metric {
    pub fn new(schema: &FeatureSchema, base: BaseDistance) -> Self {
        let mut governor = [None; NUM_FEATURES];
        let mut supremum = [0.0; NUM_FEATURES];
        for d in schema.features() {
            let i = d.feature.index();
            governor[i] = d.governor().map(|g| g.index());
            supremum[i] = base.supremum(d.min, d.max);
        }
        Metric {
            base,
            governor,
            supremum,
        }
    }

    pub fn base(&self) -> BaseDistance {
        self.base
    }

    /// `g` for a D-feature index. Panics if `j` is independent.
    pub fn dependent_distance(&self, a: &FeatureVector, b: &FeatureVector, j: usize) -> f64 {
        let tau = self.governor[j].expect("dependent_distance called on an I-feature");
        let c = self.base.eval(a[tau], b[tau]).min(1.0);
        c * self.supremum[j] + (1.0 - c) * self.base.eval(a[j], b[j])
    }

    /// Contribution of one coordinate to `d`.
    pub fn term(&self, a: &FeatureVector, b: &FeatureVector, j: usize) -> f64 {
        match self.governor[j] {
            Some(_) => self.dependent_distance(a, b, j),
            None => self.base.eval(a[j], b[j]),
        }
    }

    pub fn distance(&self, a: &FeatureVector, b: &FeatureVector) -> f64 {
        (0..NUM_FEATURES).map(|j| self.term(a, b, j)).sum()
    }
}

/// `d` under the standard schema and L1 base.
pub fn distance(a: &FeatureVector, b: &FeatureVector) -> f64 {
    static METRIC: std::sync::OnceLock<Metric> = std::sync::OnceLock::new();
    METRIC.get_or_init(Metric::default).distance(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonology::{parse_phoneme, Feature, PhonemeInventory};
    use proptest::prelude::*;

    fn mf() -> (FeatureVector, FeatureVector) {
        let s = FeatureSchema::standard();
        (parse_phoneme("m", s).unwrap(), parse_phoneme("f", s).unwrap())
    }

    #[test]
    fn m_f_worked_distance() {
        let (m, f) = mf();
        let metric = Metric::default();
        assert_eq!(metric.distance(&m, &f), 9.0);
        assert_eq!(metric.distance(&f, &m), 9.0);
        assert_eq!(metric.dependent_distance(&m, &f, Feature::DelayedRelease.index()), 2.0);
        assert_eq!(metric.dependent_distance(&m, &f, Feature::Labiodental.index()), 2.0);
    }

    #[test]
    fn self_distance_is_zero() {
        let metric = Metric::default();
        for (_, v) in PhonemeInventory::ipa().iter() {
            assert_eq!(metric.distance(v, v), 0.0);
        }
    }

    #[test]
    fn distinct_inventory_vectors_are_separated() {
        let metric = Metric::default();
        let inv: Vec<_> = PhonemeInventory::ipa().iter().map(|(_, v)| *v).collect();
        for (i, a) in inv.iter().enumerate() {
            for b in &inv[i + 1..] {
                assert!(metric.distance(a, b) > 0.0);
            }
        }
    }

    #[test]
    fn discrete_base_is_a_metric_hook() {
        let (m, f) = mf();
        let metric = Metric::new(FeatureSchema::standard(), BaseDistance::Discrete);
        assert!(metric.distance(&m, &f) > 0.0);
        assert_eq!(metric.distance(&m, &m), 0.0);
    }

    fn in_range_vector() -> impl Strategy<Value = FeatureVector> {
        let ranges: Vec<_> = FeatureSchema::standard()
            .features()
            .iter()
            .map(|d| d.min..=d.max)
            .collect();
        ranges.prop_map(|vals| {
            let mut v = FeatureVector::ZERO;
            v.0.copy_from_slice(&vals);
            v
        })
    }

    proptest! {
        #[test]
        fn triangle_and_symmetry(a in in_range_vector(), b in in_range_vector(), c in in_range_vector()) {
            let metric = Metric::default();
            let (ab, ac, bc) = (metric.distance(&a, &b), metric.distance(&a, &c), metric.distance(&b, &c));
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - metric.distance(&b, &a)).abs() <= 1e-12);
            prop_assert!(ab + ac >= bc - 1e-12);
            for j in 0..NUM_FEATURES {
                if metric.governor[j].is_some() {
                    let g = |x, y| metric.dependent_distance(x, y, j);
                    prop_assert!(g(&a, &b) + g(&a, &c) >= g(&b, &c) - 1e-12);
                }
            }
        }
    }
}
