//! Feature schema, IPA inventory and validity scoring.

pub mod inventory;
pub mod schema;
pub mod soundness;

pub use inventory::{
    canonical_symbol, display_symbol, nearest_phoneme, parse_phoneme, validate_inventory, PhonemeInventory,
    ZERO_INITIAL_MARK,
};
pub use schema::{build_schema, Feature, FeatureDescriptor, FeatureGroup, FeatureKind, FeatureSchema, FeatureVector, Gate, ValidityRule, NUM_FEATURES};
pub use soundness::{is_sound, row_distance, soundness_distance, soundness_rows};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhonologyError {
    #[error("unknown phoneme symbol {0:?}")]
    UnknownSymbol(String),
    #[error("phoneme {0:?} duplicates an existing vector")]
    DuplicateVector(String),
    #[error("phoneme {0:?} has a value outside its feature range")]
    OutOfRange(String),
    #[error("phoneme {0:?} is not a valid feature combination")]
    Unsound(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}
