//! Subcommand implementations. Each one writes its artifacts into the output
//! directory; [`run`] adds the manifest.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use protophon::clustering::{ami, kmeans, Labeling};
use protophon::dataset::{read_dataset, read_reconstruction, reconstruction_to_tsv, write_file, write_synthetic, Dataset};
use protophon::eval::{evaluate, majority_vote_feature, majority_vote_ipa, EvalReport};
use protophon::geometry::{disagreement, mds_embed, min_enclosing_ball, DisagreementMatrix};
use protophon::milp::{build_model, BigMConfig, ProblemError, ReconstructionProblem};
use protophon::reconstruct::{reconstruct, ReconstructOptions};
use protophon::solver::{write_lp, SolveOptions, SolveStatus};
use protophon::synthgen::{generate, GenerationConfig, NamedSystem, SystemSource};
use protophon::FeatureVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::args::{
    ClusterArgs, Command, EvalArgs, ExportLpArgs, GeometryArgs, HeldoutArgs, Method, ReconstructArgs, ReplayArgs, SolveArgs,
    SynthArgs,
};
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Everything needed to repeat a run. Output locations are not recorded, so
/// replays may target any directory.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub wall_time_s: f64,
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(mut command: Command) -> Result<()> {
    if let Command::Replay(r) = command {
        return replay(&r);
    }
    let out = command.out().cloned().expect("non-replay commands have an output");
    fs::create_dir_all(&out).map_err(CliError::io(&out))?;
    absolutize_inputs(&mut command)?;
    log::info!("running {}", command.name());
    let start = Instant::now();
    match &command {
        Command::Synth(a) => synth(a),
        Command::Reconstruct(a) => run_reconstruct(a),
        Command::Eval(a) => eval(a),
        Command::Heldout(a) => heldout(a),
        Command::Cluster(a) => cluster(a),
        Command::Geometry(a) => geometry(a),
        Command::ExportLp(a) => export_lp(a),
        Command::Replay(_) => unreachable!(),
    }?;
    let manifest = Manifest {
        tool: "protophon".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join(MANIFEST), &manifest)
}

fn replay(r: &ReplayArgs) -> Result<()> {
    let text = fs::read_to_string(&r.manifest).map_err(CliError::io(&r.manifest))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|source| CliError::Manifest { path: r.manifest.clone(), source })?;
    let mut command = manifest.command;
    command.set_out(r.out.clone());
    run(command)
}

/// Input paths are stored absolute so a manifest replays from any directory.
fn absolutize_inputs(command: &mut Command) -> Result<()> {
    fn abs(p: &mut PathBuf) -> Result<()> {
        *p = fs::canonicalize(&*p).map_err(CliError::io(&*p))?;
        Ok(())
    }
    match command {
        Command::Reconstruct(a) => abs(&mut a.data),
        Command::Heldout(a) => abs(&mut a.data),
        Command::ExportLp(a) => abs(&mut a.data),
        Command::Eval(a) => {
            abs(&mut a.recon)?;
            abs(&mut a.data)?;
            a.pairs.as_mut().map_or(Ok(()), abs)
        }
        Command::Cluster(a) => {
            abs(&mut a.recon)?;
            abs(&mut a.data)
        }
        Command::Geometry(a) => {
            a.data.as_mut().map_or(Ok(()), abs)?;
            a.matrix.as_mut().map_or(Ok(()), abs)
        }
        Command::Synth(_) | Command::Replay(_) => Ok(()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    Ok(write_file(path, &text)?)
}

fn synth(a: &SynthArgs) -> Result<()> {
    let system_source = match &a.system {
        Some(name) => SystemSource::Named(
            NamedSystem::from_name(name).ok_or_else(|| CliError::Invalid(format!("unknown system {name:?}")))?,
        ),
        None => SystemSource::Sampled,
    };
    let cfg = GenerationConfig {
        m_range: (a.m_min, a.m_max),
        n_range: (a.n_min, a.n_max),
        num_varieties: a.varieties,
        p_fq: a.p_fq,
        p_dia: a.p_dia,
        p_char: a.p_char,
        seed: a.seed,
        system_source,
        uniform_change: a.uniform_change,
    };
    let data = generate(&cfg)?;
    write_synthetic(&a.out, &data)?;
    write_json(&a.out.join("config.json"), &cfg)
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    method: Method,
    objective: f64,
    /// Proven lower bound; only the MILP supplies one.
    bound: Option<f64>,
    status: Option<SolveStatus>,
    nodes: usize,
    subproblems: usize,
    polish_changes: usize,
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    entries: usize,
    solve: Option<&'a SolveSummary>,
    #[serde(flatten)]
    eval: &'a EvalReport,
}

fn options(a: &SolveArgs) -> ReconstructOptions {
    ReconstructOptions {
        big_m: BigMConfig { big_m: a.big_m, ..Default::default() },
        solver: SolveOptions {
            mip_gap: a.mip_gap,
            time_limit: a.time_limit_s,
            node_limit: (a.node_limit > 0).then_some(a.node_limit),
            seed: a.seed,
            workers: a.workers,
            ..Default::default()
        },
        decompose: !a.no_decompose,
        polish: !a.no_polish,
        ..Default::default()
    }
}

fn solve(problem: &ReconstructionProblem, a: &SolveArgs) -> Result<(Vec<FeatureVector>, SolveSummary)> {
    if a.workers == 0 {
        return Err(CliError::Invalid("--workers must be at least 1".into()));
    }
    let baseline = |vectors: Vec<FeatureVector>| {
        let summary = SolveSummary {
            method: a.method,
            objective: problem.exact_objective(&vectors),
            bound: None,
            status: None,
            nodes: 0,
            subproblems: 0,
            polish_changes: 0,
        };
        (vectors, summary)
    };
    Ok(match a.method {
        Method::IpaVote => baseline(majority_vote_ipa(problem)),
        Method::FeatureVote => baseline(majority_vote_feature(problem)),
        Method::Mip => {
            let r = reconstruct(problem, &options(a))?;
            if matches!(r.status, SolveStatus::TimeLimit) {
                log::warn!("time limit reached; this run is not reproducible from its manifest");
            }
            let summary = SolveSummary {
                method: a.method,
                objective: r.objective,
                bound: Some(r.bound),
                status: Some(r.status),
                nodes: r.nodes,
                subproblems: r.subproblems.len(),
                polish_changes: r.polish_changes,
            };
            (r.vectors, summary)
        }
    })
}

fn write_reports(out: &Path, entries: usize, solve: Option<&SolveSummary>, eval: &EvalReport) -> Result<()> {
    let mut tsv = eval.to_tsv();
    if let Some(s) = solve {
        tsv.push_str(&format!("objective\t{:.6}\t{entries}\n", s.objective));
        if let Some(b) = s.bound {
            tsv.push_str(&format!("bound\t{b:.6}\t{entries}\n"));
        }
    }
    write_file(&out.join("report.tsv"), &tsv)?;
    write_json(&out.join("report.json"), &RunReport { entries, solve, eval })
}

fn pair_indices(problem: &ReconstructionProblem) -> Vec<(usize, usize)> {
    problem.pairs.iter().map(|p| (p.x, p.xu)).collect()
}

fn run_reconstruct(a: &ReconstructArgs) -> Result<()> {
    let ds = read_dataset(&a.data, a.solve.allow_unsound_readings)?;
    let problem = ds.problem(a.solve.lambda_fq, a.solve.k_medial)?;
    let (vectors, summary) = solve(&problem, &a.solve)?;
    write_file(&a.out.join("reconstruction.tsv"), &reconstruction_to_tsv(&ds.entry_ids(), &vectors))?;
    let report = evaluate(&vectors, ds.truth.as_deref(), Some(&pair_indices(&problem)))?;
    write_reports(&a.out, vectors.len(), Some(&summary), &report)
}

/// Reconstruction rows in dataset entry order.
fn aligned_reconstruction(ds: &Dataset, path: &Path) -> Result<Vec<FeatureVector>> {
    let rows = read_reconstruction(path)?;
    let mut by_id: HashMap<String, FeatureVector> = HashMap::with_capacity(rows.len());
    for (id, v) in rows {
        if by_id.insert(id.clone(), v).is_some() {
            return Err(CliError::Invalid(format!("{}: entry {id:?} appears twice", path.display())));
        }
    }
    if by_id.len() != ds.entries.len() {
        return Err(CliError::Invalid(format!(
            "{}: {} rows for {} dataset entries",
            path.display(),
            by_id.len(),
            ds.entries.len()
        )));
    }
    ds.entries
        .iter()
        .map(|e| {
            by_id
                .get(&e.id)
                .copied()
                .ok_or_else(|| CliError::Invalid(format!("{}: no row for entry {:?}", path.display(), e.id)))
        })
        .collect()
}

fn resolve_pairs(ds: &Dataset, pairs: &[(String, String)]) -> Result<Vec<(usize, usize)>> {
    let index: HashMap<&str, usize> = ds.entries.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
    let find = |id: &str| index.get(id).copied().ok_or_else(|| ProblemError::DanglingSpeller(id.to_string()));
    pairs.iter().map(|(x, xu)| Ok((find(x)?, find(xu)?))).collect()
}

fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        if f.len() < 2 {
            return Err(CliError::Invalid(format!("{}:{}: expected x and x_u", path.display(), i + 1)));
        }
        pairs.push((f[0].to_string(), f[1].to_string()));
    }
    Ok(pairs)
}

fn eval(a: &EvalArgs) -> Result<()> {
    let ds = read_dataset(&a.data, a.allow_unsound_readings)?;
    let vectors = aligned_reconstruction(&ds, &a.recon)?;
    let pairs = match &a.pairs {
        Some(p) => read_pairs(p)?,
        None => ds.pairs.clone(),
    };
    let report = evaluate(&vectors, ds.truth.as_deref(), Some(&resolve_pairs(&ds, &pairs)?))?;
    write_reports(&a.out, vectors.len(), None, &report)
}

/// Splits pair indices into (train, held out), drawing the held-out share
/// uniformly without replacement.
pub fn split_pairs(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(CliError::Invalid(format!("held-out fraction {fraction} must lie in [0, 1)")));
    }
    let take = (fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let held: BTreeSet<usize> = rand::seq::index::sample(&mut rng, n, take).into_iter().collect();
    let train = (0..n).filter(|i| !held.contains(i)).collect();
    Ok((train, held.into_iter().collect()))
}

fn heldout(a: &HeldoutArgs) -> Result<()> {
    let ds = read_dataset(&a.data, a.solve.allow_unsound_readings)?;
    let (train, held) = split_pairs(ds.pairs.len(), a.fraction, a.split_seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| ds.pairs[i].clone()).collect::<Vec<_>>();
    let (train_pairs, held_pairs) = (pick(&train), pick(&held));

    let mut split = String::from("x\tx_u\tset\n");
    let mut in_held = vec![false; ds.pairs.len()];
    for &i in &held {
        in_held[i] = true;
    }
    for ((x, xu), h) in ds.pairs.iter().zip(&in_held) {
        split.push_str(&format!("{x}\t{xu}\t{}\n", if *h { "heldout" } else { "train" }));
    }
    write_file(&a.out.join("split.tsv"), &split)?;

    let problem = ds.problem_with_pairs(&train_pairs, a.solve.lambda_fq, a.solve.k_medial)?;
    let (vectors, summary) = solve(&problem, &a.solve)?;
    write_file(&a.out.join("reconstruction.tsv"), &reconstruction_to_tsv(&ds.entry_ids(), &vectors))?;
    let report = evaluate(&vectors, ds.truth.as_deref(), Some(&resolve_pairs(&ds, &held_pairs)?))?;
    write_reports(&a.out, vectors.len(), Some(&summary), &report)
}

#[derive(Debug, Serialize)]
struct ClusterReport {
    k: usize,
    wcss: f64,
    iterations: usize,
    /// Against the dataset categories, when every entry has one.
    ami: Option<f64>,
}

fn cluster(a: &ClusterArgs) -> Result<()> {
    let ds = read_dataset(&a.data, a.allow_unsound_readings)?;
    let vectors = aligned_reconstruction(&ds, &a.recon)?;
    let categories: Option<Vec<&str>> = ds.entries.iter().map(|e| e.category.as_deref()).collect();
    let k = match (a.k, &categories) {
        (Some(k), _) => k,
        (None, Some(c)) => c.iter().collect::<BTreeSet<_>>().len(),
        (None, None) => return Err(CliError::Invalid("--k is required when entries lack categories".into())),
    };
    let points: Vec<Vec<f64>> = vectors.iter().map(|v| v.0.to_vec()).collect();
    let result = kmeans(&points, k, a.seed, a.restarts)?;
    let ami = match &categories {
        Some(c) => Some(ami(&result.labeling, &Labeling::from_keys(c.iter().copied()))?),
        None => None,
    };

    let mut labels = String::from("entry_id\tcluster\n");
    for (e, l) in ds.entries.iter().zip(&result.labeling.labels) {
        labels.push_str(&format!("{}\t{l}\n", e.id));
    }
    write_file(&a.out.join("labels.tsv"), &labels)?;
    let report = ClusterReport { k, wcss: result.wcss, iterations: result.iterations, ami };
    let mut tsv = format!("metric\tvalue\nk\t{k}\nwcss\t{:.6}\niterations\t{}\n", report.wcss, report.iterations);
    if let Some(v) = ami {
        tsv.push_str(&format!("ami\t{v:.6}\n"));
    }
    write_file(&a.out.join("report.tsv"), &tsv)?;
    write_json(&a.out.join("report.json"), &report)
}

#[derive(Debug, Serialize)]
struct GeometryReport {
    varieties: usize,
    /// Radius of the smallest ball enclosing the embedded varieties.
    lower_bound: f64,
    max_disagreement: f64,
    /// Frobenius norm of the clamped negative spectrum; zero for Euclidean input.
    distortion: f64,
    dimension: usize,
}

fn geometry(a: &GeometryArgs) -> Result<()> {
    let matrix = match (&a.data, &a.matrix) {
        (Some(dir), _) => {
            let ds = read_dataset(dir, a.allow_unsound_readings)?;
            let columns: Vec<(String, Vec<Option<FeatureVector>>)> = ds
                .varieties
                .iter()
                .enumerate()
                .map(|(vi, name)| (name.clone(), ds.entries.iter().map(|e| e.readings[vi]).collect()))
                .collect();
            disagreement(&columns)?
        }
        (None, Some(path)) => {
            let m = DisagreementMatrix::from_tsv(&fs::read_to_string(path).map_err(CliError::io(path))?)?;
            m.validate()?;
            m
        }
        (None, None) => return Err(CliError::Invalid("one of --data or --matrix is required".into())),
    };
    let embedding = mds_embed(&matrix.values);
    let ball = min_enclosing_ball(&embedding.points);
    let report = GeometryReport {
        varieties: matrix.len(),
        lower_bound: ball.radius,
        max_disagreement: matrix.values.iter().flatten().copied().fold(0.0, f64::max),
        distortion: embedding.distortion,
        dimension: embedding.points.first().map_or(0, Vec::len),
    };
    write_file(&a.out.join("disagreement.tsv"), &matrix.to_tsv())?;
    let tsv = format!(
        "metric\tvalue\nvarieties\t{}\nlower_bound\t{:.6}\nmax_disagreement\t{:.6}\ndistortion\t{:.6}\n",
        report.varieties, report.lower_bound, report.max_disagreement, report.distortion
    );
    write_file(&a.out.join("report.tsv"), &tsv)?;
    write_json(&a.out.join("report.json"), &report)
}

fn export_lp(a: &ExportLpArgs) -> Result<()> {
    let ds = read_dataset(&a.data, a.allow_unsound_readings)?;
    let problem = ds.problem(a.lambda_fq, a.k_medial)?;
    let built = build_model(&problem, &BigMConfig { big_m: a.big_m, ..Default::default() })?;
    write_file(&a.out.join("model.lp"), &write_lp(&built.model))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_seeded_and_sized() {
        let (train, held) = split_pairs(10, 0.3, 7).unwrap();
        assert_eq!(held.len(), 3);
        assert_eq!(train.len(), 7);
        assert_eq!(split_pairs(10, 0.3, 7).unwrap(), (train, held));
        assert!(split_pairs(10, 1.0, 0).is_err());
        assert_eq!(split_pairs(4, 0.0, 0).unwrap().1, Vec::<usize>::new());
    }
}
