use std::io::ErrorKind;
use std::path::PathBuf;

use protophon::clustering::ClusterError;
use protophon::dataset::DatasetError;
use protophon::eval::EvalError;
use protophon::geometry::GeometryError;
use protophon::milp::{BuildError, ProblemError};
use protophon::reconstruct::ReconstructError;
use protophon::synthgen::SynthError;
use thiserror::Error;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest {path}: {source}")]
    Manifest { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            // A missing input is a configuration mistake, not a system failure.
            CliError::Io { source, .. } if source.kind() == ErrorKind::NotFound => EXIT_VALIDATION,
            CliError::Dataset(DatasetError::Io { source, .. }) if source.kind() == ErrorKind::NotFound => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_FAILURE,
            CliError::Dataset(e) if !e.is_validation() => EXIT_FAILURE,
            CliError::Reconstruct(e) if e.is_infeasible() => EXIT_INFEASIBLE,
            CliError::Reconstruct(ReconstructError::Solve { .. }) => EXIT_FAILURE,
            _ => EXIT_VALIDATION,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use protophon::solver::SolveError;

    #[test]
    fn exit_codes() {
        let infeasible = CliError::Reconstruct(ReconstructError::Solve { index: 0, source: SolveError::Infeasible });
        assert_eq!(infeasible.exit_code(), EXIT_INFEASIBLE);
        let stalled = CliError::Reconstruct(ReconstructError::Solve { index: 0, source: SolveError::LpFailure });
        assert_eq!(stalled.exit_code(), EXIT_FAILURE);
        assert_eq!(CliError::Problem(ProblemError::DanglingSpeller("x".into())).exit_code(), EXIT_VALIDATION);
        assert_eq!(CliError::Invalid("bad".into()).exit_code(), EXIT_VALIDATION);
        let io = CliError::io("f")(std::io::Error::other("disk"));
        assert_eq!(io.exit_code(), EXIT_FAILURE);
        let missing = CliError::io("f")(std::io::Error::from(ErrorKind::NotFound));
        assert_eq!(missing.exit_code(), EXIT_VALIDATION);
    }
}
