//! Command-line surface. Every subcommand's arguments double as its manifest
//! record, so they derive both clap and serde traits.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "protophon", version, about = "Reconstruct ancestral consonant initials with a MILP")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic dataset
    Synth(SynthArgs),
    /// Reconstruct initials for a dataset
    Reconstruct(ReconstructArgs),
    /// Score a reconstruction against truth and speller pairs
    Eval(EvalArgs),
    /// Reconstruct with part of the speller pairs held out and score on them
    Heldout(HeldoutArgs),
    /// KMeans on reconstructed vectors, scored by AMI against categories
    Cluster(ClusterArgs),
    /// Lower bound on the dialect change rate from variety disagreement
    Geometry(GeometryArgs),
    /// Write the reconstruction model in LP format
    ExportLp(ExportLpArgs),
    /// Re-run a previous invocation from its manifest
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Reconstruct(_) => "reconstruct",
            Command::Eval(_) => "eval",
            Command::Heldout(_) => "heldout",
            Command::Cluster(_) => "cluster",
            Command::Geometry(_) => "geometry",
            Command::ExportLp(_) => "export-lp",
            Command::Replay(_) => "replay",
        }
    }

    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Synth(a) => Some(&a.out),
            Command::Reconstruct(a) => Some(&a.out),
            Command::Eval(a) => Some(&a.out),
            Command::Heldout(a) => Some(&a.out),
            Command::Cluster(a) => Some(&a.out),
            Command::Geometry(a) => Some(&a.out),
            Command::ExportLp(a) => Some(&a.out),
            Command::Replay(_) => None,
        }
    }

    pub fn set_out(&mut self, dir: PathBuf) {
        match self {
            Command::Synth(a) => a.out = dir,
            Command::Reconstruct(a) => a.out = dir,
            Command::Eval(a) => a.out = dir,
            Command::Heldout(a) => a.out = dir,
            Command::Cluster(a) => a.out = dir,
            Command::Geometry(a) => a.out = dir,
            Command::ExportLp(a) => a.out = dir,
            Command::Replay(_) => {}
        }
    }
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    /// Output dataset directory
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fewest initials in a sampled system
    #[arg(long, default_value_t = 35)]
    pub m_min: usize,
    /// Most initials in a sampled system
    #[arg(long, default_value_t = 40)]
    pub m_max: usize,
    /// Fewest characters per initial
    #[arg(long, default_value_t = 20)]
    pub n_min: usize,
    /// Most characters per initial
    #[arg(long, default_value_t = 80)]
    pub n_max: usize,
    #[arg(long, default_value_t = 20)]
    pub varieties: usize,
    /// Probability that a speller annotation is corrupted
    #[arg(long, default_value_t = 0.1)]
    pub p_fq: f64,
    /// Probability that a variety changes a given initial
    #[arg(long, default_value_t = 0.3)]
    pub p_dia: f64,
    /// Probability that a character follows its initial's change
    #[arg(long, default_value_t = 0.3)]
    pub p_char: f64,
    /// Use a named consonant system instead of sampling one
    #[arg(long, value_parser = ["english", "german", "mandarin", "latin"])]
    pub system: Option<String>,
    /// Redraw changed initials uniformly rather than favouring close ones
    #[arg(long)]
    pub uniform_change: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Mip,
    /// Most frequent IPA reading per entry
    IpaVote,
    /// Most frequent value per feature
    FeatureVote,
}

/// Model and solver settings shared by every command that reconstructs.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    /// Weight of the speller-pair term
    #[arg(long, default_value_t = 0.5)]
    pub lambda_fq: f64,
    /// Multiplier for speller pairs whose medials match
    #[arg(long, default_value_t = 1.0)]
    pub k_medial: f64,
    #[arg(long, value_enum, default_value_t = Method::Mip)]
    pub method: Method,
    /// Relative optimality gap at which branch and bound stops
    #[arg(long, default_value_t = 1e-4)]
    pub mip_gap: f64,
    /// Wall-clock budget per sub-problem. Runs that hit it are not reproducible
    #[arg(long)]
    pub time_limit_s: Option<f64>,
    /// Node budget per sub-problem (0 for none)
    #[arg(long, default_value_t = 20_000)]
    pub node_limit: usize,
    /// Solver seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Concurrent workers; results are reproducible only with 1
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Cap on big-M coefficients
    #[arg(long, default_value_t = 10.0)]
    pub big_m: f64,
    /// Solve the whole model at once instead of per component and group
    #[arg(long)]
    pub no_decompose: bool,
    /// Skip the post-solve local search
    #[arg(long)]
    pub no_polish: bool,
    /// Accept readings that are not valid feature combinations
    #[arg(long)]
    pub allow_unsound_readings: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ReconstructArgs {
    /// Dataset directory
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub solve: SolveArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Reconstruction table written by `reconstruct`
    #[arg(long)]
    pub recon: PathBuf,
    /// Dataset directory supplying ground truth and speller pairs
    #[arg(long)]
    pub data: PathBuf,
    /// Score speller-pair matching on this file instead of the dataset's pairs
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long)]
    pub allow_unsound_readings: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct HeldoutArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Share of speller pairs held out of the model
    #[arg(long, default_value_t = 0.3)]
    pub fraction: f64,
    /// Seed for the split
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub solve: SolveArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ClusterArgs {
    #[arg(long)]
    pub recon: PathBuf,
    /// Dataset directory supplying reference categories
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Number of clusters; defaults to the number of distinct categories
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long)]
    pub allow_unsound_readings: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct GeometryArgs {
    /// Dataset directory whose varieties are compared
    #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
    pub data: Option<PathBuf>,
    /// Precomputed disagreement matrix
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long)]
    pub allow_unsound_readings: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ExportLpArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory; the model goes to `model.lp`
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub lambda_fq: f64,
    #[arg(long, default_value_t = 1.0)]
    pub k_medial: f64,
    #[arg(long, default_value_t = 10.0)]
    pub big_m: f64,
    #[arg(long)]
    pub allow_unsound_readings: bool,
}

#[derive(Clone, Debug, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where to write the replayed outputs
    #[arg(long)]
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn command_serde_round_trip() {
        let cli = Cli::parse_from(["protophon", "heldout", "--data", "d", "--out", "o", "--fraction", "0.25", "--lambda-fq", "0"]);
        let json = serde_json::to_string(&cli.command).unwrap();
        let back: Command = serde_json::from_str(&json).unwrap();
        match back {
            Command::Heldout(a) => {
                assert_eq!(a.fraction, 0.25);
                assert_eq!(a.solve.lambda_fq, 0.0);
                assert_eq!(a.solve.node_limit, 20_000);
                assert_eq!(a.out, PathBuf::new());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
