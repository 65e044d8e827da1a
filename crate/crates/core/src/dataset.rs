//! On-disk dataset layout shared by the generator and the CLI.
//!
//! A dataset directory holds UTF-8 tab-separated files, each with a header
//! row:
//!
//! * `entries.tsv`: `entry_id  character  category  medial` (last two may be empty)
//! * `pairs.tsv`: `x  x_u  corrupted` (the flag column is optional)
//! * `variety_<name>.tsv`: `entry_id  reading`
//! * `ground_truth.tsv`: `entry_id  initial` (synthetic data only)
//!
//! Readings are IPA symbols (`∅` for the zero initial) or a bracketed list of
//! 14 feature values. Entries missing from a variety file have no reading in
//! that variety.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::milp::{Entry, ProblemError, ReconstructionProblem};
use crate::phonology::{
    display_symbol, parse_phoneme, soundness_distance, FeatureSchema, FeatureVector, PhonemeInventory, NUM_FEATURES,
};
use crate::synthgen::SyntheticDataset;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{file}: {source}")]
    Io { file: PathBuf, source: std::io::Error },
    #[error("{file}:{line}: {message}")]
    Parse { file: PathBuf, line: usize, message: String },
    #[error("{file}:{line}: reading {reading:?} is not a valid feature combination")]
    Unsound { file: PathBuf, line: usize, reading: String },
    #[error("no variety_<name>.tsv files in {0}")]
    NoVarieties(PathBuf),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

impl DatasetError {
    /// Whether the error stems from malformed or inconsistent input rather
    /// than the filesystem.
    pub fn is_validation(&self) -> bool {
        !matches!(self, DatasetError::Io { .. })
    }
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io { file: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, text: &str) -> Result<(), DatasetError> {
    fs::write(path, text).map_err(|source| DatasetError::Io { file: path.to_path_buf(), source })
}

/// Data rows of a TSV file with their 1-based line numbers. The header row
/// and blank lines are skipped.
fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split('\t').map(str::trim).collect()))
}

/// Parses one reading. Returns `None` for an explicit missing marker.
pub fn parse_reading(field: &str) -> Result<Option<FeatureVector>, String> {
    if matches!(field, "NA" | "?" | "-") {
        return Ok(None);
    }
    if let Some(inner) = field.strip_prefix('[').and_then(|f| f.strip_suffix(']')) {
        let vals: Vec<f64> = inner
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad feature value {x:?} in {field:?}")))
            .collect::<Result<_, _>>()?;
        if vals.len() != NUM_FEATURES {
            return Err(format!("{field:?} has {} values, expected {NUM_FEATURES}", vals.len()));
        }
        let mut v = FeatureVector::ZERO;
        v.0.copy_from_slice(&vals);
        if !FeatureSchema::standard().in_range(&v) {
            return Err(format!("{field:?} has values outside the feature ranges"));
        }
        return Ok(Some(v));
    }
    parse_phoneme(field, FeatureSchema::standard())
        .map(Some)
        .map_err(|_| format!("unknown IPA symbol {field:?}"))
}

/// Symbol for a vector when it is an inventory phoneme, else the bracketed
/// value list.
pub fn format_reading(v: &FeatureVector) -> String {
    match PhonemeInventory::ipa().symbol_of(v) {
        Some(s) => display_symbol(s).to_string(),
        None => format!(
            "[{}]",
            v.0.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
        ),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub varieties: Vec<String>,
    pub entries: Vec<Entry>,
    pub pairs: Vec<(String, String)>,
    /// Ground-truth vector per entry, when `ground_truth.tsv` exists.
    pub truth: Option<Vec<FeatureVector>>,
}

impl Dataset {
    pub fn problem(&self, lambda_fq: f64, k_medial: f64) -> Result<ReconstructionProblem, ProblemError> {
        ReconstructionProblem::new(self.varieties.clone(), self.entries.clone(), &self.pairs, lambda_fq, k_medial)
    }

    pub fn problem_with_pairs(
        &self,
        pairs: &[(String, String)],
        lambda_fq: f64,
        k_medial: f64,
    ) -> Result<ReconstructionProblem, ProblemError> {
        ReconstructionProblem::new(self.varieties.clone(), self.entries.clone(), pairs, lambda_fq, k_medial)
    }

    pub fn entry_ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.id.clone()).collect()
    }
}

/// Reads and validates a dataset directory. Unsound readings are rejected
/// unless `allow_unsound` is set.
pub fn read_dataset(dir: &Path, allow_unsound: bool) -> Result<Dataset, DatasetError> {
    let entries_path = dir.join("entries.tsv");
    let text = read(&entries_path)?;
    let mut entries: Vec<Entry> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (line, f) in rows(&text) {
        let id = f[0].to_string();
        if id.is_empty() {
            return Err(DatasetError::Parse { file: entries_path.clone(), line, message: "empty entry id".into() });
        }
        if index.insert(id.clone(), entries.len()).is_some() {
            return Err(ProblemError::DuplicateEntryId(id).into());
        }
        let opt = |i: usize| f.get(i).filter(|s| !s.is_empty()).map(|s| s.to_string());
        let mut e = Entry::new(id, Vec::new());
        e.character = opt(1).unwrap_or_else(|| e.id.clone());
        e.category = opt(2);
        e.medial = opt(3);
        entries.push(e);
    }

    let mut variety_files: BTreeMap<String, PathBuf> = BTreeMap::new();
    let listing = fs::read_dir(dir).map_err(|source| DatasetError::Io { file: dir.to_path_buf(), source })?;
    for item in listing {
        let path = item.map_err(|source| DatasetError::Io { file: dir.to_path_buf(), source })?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if let Some(v) = name.strip_prefix("variety_").and_then(|n| n.strip_suffix(".tsv")) {
            variety_files.insert(v.to_string(), path.clone());
        }
    }
    if variety_files.is_empty() {
        return Err(DatasetError::NoVarieties(dir.to_path_buf()));
    }
    let varieties: Vec<String> = variety_files.keys().cloned().collect();
    for e in &mut entries {
        e.readings = vec![None; varieties.len()];
    }
    let schema = FeatureSchema::standard();
    for (vi, path) in variety_files.values().enumerate() {
        let text = read(path)?;
        for (line, f) in rows(&text) {
            let parse_err = |message: String| DatasetError::Parse { file: path.clone(), line, message };
            if f.len() < 2 {
                return Err(parse_err("expected entry_id and reading".into()));
            }
            let &i = index
                .get(f[0])
                .ok_or_else(|| parse_err(format!("unknown entry id {:?}", f[0])))?;
            let reading = parse_reading(f[1]).map_err(parse_err)?;
            if let Some(v) = &reading {
                if !allow_unsound && soundness_distance(v, schema) > 0.0 {
                    return Err(DatasetError::Unsound { file: path.clone(), line, reading: f[1].to_string() });
                }
            }
            entries[i].readings[vi] = reading;
        }
    }

    let pairs_path = dir.join("pairs.tsv");
    let mut pairs = Vec::new();
    if pairs_path.exists() {
        for (line, f) in rows(&read(&pairs_path)?) {
            if f.len() < 2 {
                return Err(DatasetError::Parse { file: pairs_path.clone(), line, message: "expected x and x_u".into() });
            }
            pairs.push((f[0].to_string(), f[1].to_string()));
        }
    }

    let truth_path = dir.join("ground_truth.tsv");
    let truth = if truth_path.exists() {
        let mut t = vec![None; entries.len()];
        for (line, f) in rows(&read(&truth_path)?) {
            let parse_err = |message: String| DatasetError::Parse { file: truth_path.clone(), line, message };
            let &i = index.get(f[0]).ok_or_else(|| parse_err(format!("unknown entry id {:?}", f[0])))?;
            let v = parse_reading(f.get(1).copied().unwrap_or("")).map_err(parse_err)?;
            t[i] = v;
        }
        match t.into_iter().collect::<Option<Vec<_>>>() {
            Some(t) => Some(t),
            None => {
                return Err(DatasetError::Parse {
                    file: truth_path,
                    line: 0,
                    message: "ground truth does not cover every entry".into(),
                })
            }
        }
    } else {
        None
    };

    let ds = Dataset { varieties, entries, pairs, truth };
    // Surface dangling speller ids and other problem-level errors now.
    ReconstructionProblem::new(ds.varieties.clone(), ds.entries.clone(), &ds.pairs, 0.5, 1.0)?;
    Ok(ds)
}

/// Writes a generated dataset in the directory layout above.
pub fn write_synthetic(dir: &Path, data: &SyntheticDataset) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(|source| DatasetError::Io { file: dir.to_path_buf(), source })?;
    let mut entries = String::from("entry_id\tcharacter\tcategory\tmedial\n");
    let mut truth = String::from("entry_id\tinitial\n");
    for c in &data.characters {
        let initial = &data.initials[c.initial];
        entries.push_str(&format!("{}\t{}\t{}\t\n", c.id, c.id, initial.id));
        truth.push_str(&format!("{}\t{}\n", c.id, display_symbol(&initial.symbol)));
    }
    write_file(&dir.join("entries.tsv"), &entries)?;
    write_file(&dir.join("ground_truth.tsv"), &truth)?;
    let mut pairs = String::from("x\tx_u\tcorrupted\n");
    for p in &data.pairs {
        pairs.push_str(&format!(
            "{}\t{}\t{}\n",
            data.characters[p.x].id,
            data.characters[p.xu].id,
            u8::from(p.corrupted)
        ));
    }
    write_file(&dir.join("pairs.tsv"), &pairs)?;
    for v in &data.varieties {
        let mut text = String::from("entry_id\treading\n");
        for (c, r) in data.characters.iter().zip(&v.readings) {
            text.push_str(&format!("{}\t{}\n", c.id, display_symbol(r)));
        }
        write_file(&dir.join(format!("variety_{}.tsv", v.name)), &text)?;
    }
    Ok(())
}

/// Reconstruction table: entry id, symbol (or `?` when the vector is not an
/// inventory phoneme) and the 14 feature values.
pub fn reconstruction_to_tsv(ids: &[String], vectors: &[FeatureVector]) -> String {
    let mut out = String::from("entry_id\tsymbol");
    for f in crate::phonology::Feature::ALL {
        out.push('\t');
        out.push_str(f.name());
    }
    out.push('\n');
    let inv = PhonemeInventory::ipa();
    for (id, v) in ids.iter().zip(vectors) {
        out.push_str(id);
        out.push('\t');
        out.push_str(inv.symbol_of(v).map_or("?", display_symbol));
        for x in &v.0 {
            out.push_str(&format!("\t{x}"));
        }
        out.push('\n');
    }
    out
}

/// Reads a reconstruction table back as `(entry id, vector)` rows.
pub fn read_reconstruction(path: &Path) -> Result<Vec<(String, FeatureVector)>, DatasetError> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (line, f) in rows(&text) {
        let parse_err = |message: String| DatasetError::Parse { file: path.to_path_buf(), line, message };
        if f.len() != NUM_FEATURES + 2 {
            return Err(parse_err(format!("expected {} columns, found {}", NUM_FEATURES + 2, f.len())));
        }
        let mut v = FeatureVector::ZERO;
        for (slot, x) in v.0.iter_mut().zip(&f[2..]) {
            *slot = x.parse().map_err(|_| parse_err(format!("bad number {x:?}")))?;
        }
        out.push((f[0].to_string(), v));
    }
    Ok(out)
}
