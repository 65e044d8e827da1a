//! Mixed-integer model of the reconstruction objective.

pub mod builder;
pub mod model;
pub mod problem;

pub use builder::{
    assignment_from_vectors, build_group_model, build_model, build_restricted_model, BigMConfig, BuildError,
    ReconstructionModel,
};
pub use model::{Constraint, MilpModel, ModelError, Sense, VarId, VarKind, VarRole, Variable};
pub use problem::{Entry, ProblemError, ReconstructionProblem, SpellerPair};
