//! Reconstruction of ancestral consonant initials as a mixed-integer program.

pub mod clustering;
pub mod dataset;
pub mod eval;
pub mod geometry;
pub mod metric;
pub mod milp;
pub mod phonology;
pub mod reconstruct;
pub mod solver;
pub mod synthgen;

pub use metric::{distance, BaseDistance, Metric};
pub use phonology::{
    nearest_phoneme, parse_phoneme, soundness_distance, Feature, FeatureSchema, FeatureVector, PhonemeInventory,
    PhonologyError,
};
