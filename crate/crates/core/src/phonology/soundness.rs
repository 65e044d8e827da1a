//! Distance of an arbitrary feature vector from the set of valid phonemes.

use super::schema::{FeatureSchema, FeatureVector, ValidityRule};

/// L1 distance from `(v[governor], v[dependent])` to the nearest valid
/// combination of one rule.
pub fn row_distance(v: &FeatureVector, rule: &ValidityRule) -> f64 {
    let (a, b) = (v[rule.governor], v[rule.dependent]);
    rule.combinations
        .iter()
        .map(|&(x, y)| (a - x).abs() + (b - y).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Per-rule distances in schema order.
pub fn soundness_rows(v: &FeatureVector, schema: &FeatureSchema) -> Vec<f64> {
    schema.validity().iter().map(|r| row_distance(v, r)).collect()
}

/// Sum over all D-features of the distance to the nearest valid combination.
/// Zero exactly when every governor/dependent pair is valid.
pub fn soundness_distance(v: &FeatureVector, schema: &FeatureSchema) -> f64 {
    schema.validity().iter().map(|r| row_distance(v, r)).sum()
}

/// Whether the vector counts as a valid phoneme encoding.
pub fn is_sound(v: &FeatureVector, schema: &FeatureSchema, tol: f64) -> bool {
    soundness_distance(v, schema) < tol
}
