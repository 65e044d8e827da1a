//! The fourteen-feature schema used to encode consonant initials.
//!
//! Features are split into independent features (I-features) and dependent
//! features (D-features). A D-feature is only meaningful when its governing
//! I-feature takes a particular value; otherwise it is zero.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

/// Number of features in the schema.
pub const NUM_FEATURES: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Continuant,
    DelayedRelease,
    Sonority,
    Voice,
    SpreadGlottis,
    Labial,
    Labiodental,
    Coronal,
    Anterior,
    Distributed,
    Lateral,
    Dorsal,
    High,
    Front,
}

impl Feature {
    /// All features in vector order.
    pub const ALL: [Feature; NUM_FEATURES] = [
        Feature::Continuant,
        Feature::DelayedRelease,
        Feature::Sonority,
        Feature::Voice,
        Feature::SpreadGlottis,
        Feature::Labial,
        Feature::Labiodental,
        Feature::Coronal,
        Feature::Anterior,
        Feature::Distributed,
        Feature::Lateral,
        Feature::Dorsal,
        Feature::High,
        Feature::Front,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Feature> {
        Self::ALL.get(index).copied()
    }

    /// Snake-case name used in file headers.
    pub const fn name(self) -> &'static str {
        match self {
            Feature::Continuant => "continuant",
            Feature::DelayedRelease => "delayed_release",
            Feature::Sonority => "sonority",
            Feature::Voice => "voice",
            Feature::SpreadGlottis => "spread_glottis",
            Feature::Labial => "labial",
            Feature::Labiodental => "labiodental",
            Feature::Coronal => "coronal",
            Feature::Anterior => "anterior",
            Feature::Distributed => "distributed",
            Feature::Lateral => "lateral",
            Feature::Dorsal => "dorsal",
            Feature::High => "high",
            Feature::Front => "front",
        }
    }

    /// Short identifier safe for LP-format variable names.
    pub const fn short(self) -> &'static str {
        match self {
            Feature::Continuant => "cont",
            Feature::DelayedRelease => "dr",
            Feature::Sonority => "son",
            Feature::Voice => "voi",
            Feature::SpreadGlottis => "sg",
            Feature::Labial => "lab",
            Feature::Labiodental => "ldl",
            Feature::Coronal => "cor",
            Feature::Anterior => "ant",
            Feature::Distributed => "dis",
            Feature::Lateral => "lat",
            Feature::Dorsal => "dor",
            Feature::High => "hi",
            Feature::Front => "fr",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a D-feature is tied to its governing I-feature in the optimisation
/// model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    /// Delayed release: bounded in magnitude by `max(0, min(son, 2 - son))`.
    SonorityWindow,
    /// High/front: zero unless the governor exceeds one half, then at least 1.
    Graded,
    /// Other D-features: magnitude equals the governor indicator, value in {-1, 0, 1}.
    Signed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    Independent,
    Dependent { governor: Feature, gate: Gate },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureDescriptor {
    pub feature: Feature,
    pub kind: FeatureKind,
    /// Lower end of the closed range (already `min(0, l_j)`).
    pub min: f64,
    pub max: f64,
    /// Supremum of the base distance over the range (`s_j`).
    pub supremum: f64,
}

impl FeatureDescriptor {
    pub fn is_dependent(&self) -> bool {
        matches!(self.kind, FeatureKind::Dependent { .. })
    }

    pub fn governor(&self) -> Option<Feature> {
        match self.kind {
            FeatureKind::Dependent { governor, .. } => Some(governor),
            FeatureKind::Independent => None,
        }
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }
}

/// An I-feature and the D-features it governs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureGroup {
    pub head: Feature,
    pub dependents: Vec<Feature>,
}

impl FeatureGroup {
    /// Member features, head first.
    pub fn members(&self) -> impl Iterator<Item = Feature> + '_ {
        std::iter::once(self.head).chain(self.dependents.iter().copied())
    }
}

/// Valid `(governor, dependent)` value combinations for one D-feature.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidityRule {
    pub governor: Feature,
    pub dependent: Feature,
    pub combinations: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSchema {
    features: Vec<FeatureDescriptor>,
    validity: Vec<ValidityRule>,
}

/// Builds the canonical schema.
pub fn build_schema() -> FeatureSchema {
    use Feature::*;

    let descriptor = |feature: Feature, kind: FeatureKind| {
        let (min, max) = match feature {
            Sonority => (0.0, 5.0),
            High | Front => (0.0, 3.0),
            _ => (-1.0, 1.0),
        };
        FeatureDescriptor {
            feature,
            kind,
            min,
            max,
            supremum: max - min,
        }
    };
    let dep = |governor, gate| FeatureKind::Dependent { governor, gate };

    let features = Feature::ALL
        .iter()
        .map(|&f| {
            let kind = match f {
                DelayedRelease => dep(Sonority, Gate::SonorityWindow),
                Labiodental => dep(Labial, Gate::Signed),
                Anterior | Distributed => dep(Coronal, Gate::Signed),
                High | Front => dep(Dorsal, Gate::Graded),
                _ => FeatureKind::Independent,
            };
            descriptor(f, kind)
        })
        .collect::<Vec<_>>();

    let signed = vec![(1.0, 1.0), (1.0, -1.0), (-1.0, 0.0), (0.0, 0.0)];
    let graded = vec![(-1.0, 0.0), (1.0, 1.0), (1.0, 2.0), (1.0, 3.0), (0.0, 0.0)];
    let validity = vec![
        ValidityRule {
            governor: Sonority,
            dependent: DelayedRelease,
            combinations: vec![
                (1.0, 1.0),
                (1.0, -1.0),
                (2.0, 0.0),
                (3.0, 0.0),
                (4.0, 0.0),
                (5.0, 0.0),
                (0.0, 0.0),
            ],
        },
        ValidityRule {
            governor: Labial,
            dependent: Labiodental,
            combinations: signed.clone(),
        },
        ValidityRule {
            governor: Coronal,
            dependent: Anterior,
            combinations: signed.clone(),
        },
        ValidityRule {
            governor: Coronal,
            dependent: Distributed,
            combinations: signed,
        },
        ValidityRule {
            governor: Dorsal,
            dependent: High,
            combinations: graded.clone(),
        },
        ValidityRule {
            governor: Dorsal,
            dependent: Front,
            combinations: graded,
        },
    ];

    FeatureSchema { features, validity }
}

impl FeatureSchema {
    /// Shared instance of [`build_schema`].
    pub fn standard() -> &'static FeatureSchema {
        static SCHEMA: OnceLock<FeatureSchema> = OnceLock::new();
        SCHEMA.get_or_init(build_schema)
    }

    pub fn features(&self) -> &[FeatureDescriptor] {
        &self.features
    }

    pub fn descriptor(&self, feature: Feature) -> &FeatureDescriptor {
        &self.features[feature.index()]
    }

    pub fn validity(&self) -> &[ValidityRule] {
        &self.validity
    }

    pub fn independent(&self) -> impl Iterator<Item = &FeatureDescriptor> + '_ {
        self.features.iter().filter(|d| !d.is_dependent())
    }

    pub fn dependent(&self) -> impl Iterator<Item = &FeatureDescriptor> + '_ {
        self.features.iter().filter(|d| d.is_dependent())
    }

    /// I-features that govern at least one D-feature, in vector order.
    pub fn governors(&self) -> Vec<Feature> {
        let mut out: Vec<Feature> = self.dependent().filter_map(|d| d.governor()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Partition of the features into groups: each I-feature with the
    /// D-features it governs. The metric and the validity table never couple
    /// two groups.
    pub fn groups(&self) -> Vec<FeatureGroup> {
        self.independent()
            .map(|d| FeatureGroup {
                head: d.feature,
                dependents: self
                    .dependent()
                    .filter(|j| j.governor() == Some(d.feature))
                    .map(|j| j.feature)
                    .collect(),
            })
            .collect()
    }

    /// Every valid value tuple of a group, head first. A lone I-feature takes
    /// the integers of its range; a governor group combines the validity rules
    /// of its dependents.
    pub fn valid_tuples(&self, group: &FeatureGroup) -> Vec<Vec<f64>> {
        let head = self.descriptor(group.head);
        if group.dependents.is_empty() {
            let (lo, hi) = (head.min.ceil() as i64, head.max.floor() as i64);
            return (lo..=hi).map(|v| vec![v as f64]).collect();
        }
        let rules: Vec<&ValidityRule> = group
            .dependents
            .iter()
            .map(|&j| {
                self.validity
                    .iter()
                    .find(|r| r.dependent == j && r.governor == group.head)
                    .expect("every dependent has a validity rule")
            })
            .collect();
        let mut heads: Vec<f64> = rules[0].combinations.iter().map(|c| c.0).collect();
        heads.sort_by(f64::total_cmp);
        heads.dedup();
        let mut out = Vec::new();
        for g in heads {
            let mut partial: Vec<Vec<f64>> = vec![vec![g]];
            for rule in &rules {
                let options: Vec<f64> = rule.combinations.iter().filter(|c| c.0 == g).map(|c| c.1).collect();
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        options.iter().map(move |&o| {
                            let mut q = p.clone();
                            q.push(o);
                            q
                        })
                    })
                    .collect();
            }
            out.extend(partial);
        }
        out
    }

    pub fn in_range(&self, v: &FeatureVector) -> bool {
        self.features
            .iter()
            .all(|d| (d.min..=d.max).contains(&v[d.feature]))
    }
}

/// A point in feature space, one value per feature in [`Feature::ALL`] order.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    /// The zero initial.
    pub const ZERO: FeatureVector = FeatureVector([0.0; NUM_FEATURES]);

    pub fn new(values: [f64; NUM_FEATURES]) -> Self {
        FeatureVector(values)
    }

    pub fn values(&self) -> &[f64; NUM_FEATURES] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    /// Plain L1 distance (not the feature metric).
    pub fn l1(&self, other: &FeatureVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn l2(&self, other: &FeatureVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Total order on the raw values, used for deterministic tie-breaking.
    pub fn total_cmp(&self, other: &FeatureVector) -> std::cmp::Ordering {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl Index<Feature> for FeatureVector {
    type Output = f64;
    fn index(&self, f: Feature) -> &f64 {
        &self.0[f.index()]
    }
}

impl IndexMut<Feature> for FeatureVector {
    fn index_mut(&mut self, f: Feature) -> &mut f64 {
        &mut self.0[f.index()]
    }
}

impl Index<usize> for FeatureVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
