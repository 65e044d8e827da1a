//! Synthetic consonant systems, speller pairs and descendant varieties.
//!
//! Generation runs in three steps from one seeded ChaCha stream: pick a
//! ground-truth system, attach one upper speller per character (some of them
//! corrupted), then derive each variety through regular change of whole
//! initials followed by irregular change of single characters.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{Entry, ProblemError, ReconstructionProblem};
use crate::phonology::{FeatureVector, PhonemeInventory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("inventory has {available} phonemes but {needed} initials were requested")]
    InventoryTooSmall { available: usize, needed: usize },
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
}

/// Fixed consonant tables usable instead of a sampled system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedSystem {
    English,
    German,
    Mandarin,
    Latin,
}

impl NamedSystem {
    pub fn symbols(self) -> &'static [&'static str] {
        match self {
            NamedSystem::English => &[
                "p", "b", "t", "d", "k", "ɡ", "tʃ", "dʒ", "f", "v", "θ", "ð", "s", "z", "ʃ", "ʒ", "h", "m", "n", "ŋ",
                "l", "ɹ", "j", "w",
            ],
            NamedSystem::German => &[
                "p", "b", "t", "d", "k", "ɡ", "pf", "ts", "tʃ", "f", "v", "s", "z", "ʃ", "ʒ", "ç", "x", "h", "m", "n",
                "ŋ", "l", "ʁ", "j",
            ],
            NamedSystem::Mandarin => &[
                "", "p", "pʰ", "t", "tʰ", "k", "kʰ", "ts", "tsʰ", "ʈʂ", "ʈʂʰ", "tɕ", "tɕʰ", "f", "s", "ʂ", "ʐ", "ɕ",
                "x", "m", "n", "l",
            ],
            // The inventory has no separate trill, so the rhotic is ɹ.
            NamedSystem::Latin => &[
                "p", "b", "t", "d", "k", "ɡ", "kʷ", "ɡʷ", "f", "s", "z", "h", "m", "n", "l", "ɹ", "j", "w",
            ],
        }
    }

    pub fn from_name(name: &str) -> Option<NamedSystem> {
        match name.to_ascii_lowercase().as_str() {
            "english" => Some(NamedSystem::English),
            "german" => Some(NamedSystem::German),
            "mandarin" => Some(NamedSystem::Mandarin),
            "latin" => Some(NamedSystem::Latin),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "kind", content = "name")]
pub enum SystemSource {
    #[default]
    Sampled,
    Named(NamedSystem),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    /// Inclusive range for the number of initials.
    pub m_range: (usize, usize),
    /// Inclusive range for characters per initial.
    pub n_range: (usize, usize),
    pub num_varieties: usize,
    pub p_fq: f64,
    pub p_dia: f64,
    pub p_char: f64,
    pub seed: u64,
    pub system_source: SystemSource,
    /// Redraw changed initials uniformly instead of by exp(-L1) weights.
    pub uniform_change: bool,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            m_range: (35, 40),
            n_range: (20, 80),
            num_varieties: 20,
            p_fq: 0.1,
            p_dia: 0.3,
            p_char: 0.3,
            seed: 0,
            system_source: SystemSource::Sampled,
            uniform_change: false,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.m_range.0 == 0 || self.m_range.0 > self.m_range.1 {
            return bad(format!("m_range {:?} is empty", self.m_range));
        }
        if self.n_range.0 == 0 || self.n_range.0 > self.n_range.1 {
            return bad(format!("n_range {:?} is empty", self.n_range));
        }
        if self.num_varieties == 0 {
            return bad("num_varieties must be positive".into());
        }
        for (name, p) in [("p_fq", self.p_fq), ("p_dia", self.p_dia), ("p_char", self.p_char)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Initial {
    pub id: String,
    pub symbol: String,
    pub vector: FeatureVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Character {
    pub id: String,
    /// Index into [`SyntheticDataset::initials`].
    pub initial: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticPair {
    pub x: usize,
    pub xu: usize,
    pub corrupted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variety {
    pub name: String,
    /// Reading symbol per character.
    pub readings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDataset {
    pub initials: Vec<Initial>,
    pub characters: Vec<Character>,
    pub pairs: Vec<SyntheticPair>,
    pub varieties: Vec<Variety>,
}

impl SyntheticDataset {
    pub fn truth(&self) -> Vec<FeatureVector> {
        self.characters.iter().map(|c| self.initials[c.initial].vector).collect()
    }

    /// Turns the dataset into a reconstruction problem. Entry categories are
    /// the true initial ids.
    pub fn to_problem(&self, lambda_fq: f64, k_medial: f64) -> Result<ReconstructionProblem, ProblemError> {
        let inv = PhonemeInventory::ipa();
        let entries = self
            .characters
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                let readings = self
                    .varieties
                    .iter()
                    .map(|v| inv.get(&v.readings[ci]).copied())
                    .collect();
                let mut e = Entry::new(c.id.clone(), readings);
                e.category = Some(self.initials[c.initial].id.clone());
                e
            })
            .collect();
        let pairs: Vec<(String, String)> = self
            .pairs
            .iter()
            .map(|p| (self.characters[p.x].id.clone(), self.characters[p.xu].id.clone()))
            .collect();
        ReconstructionProblem::new(
            self.varieties.iter().map(|v| v.name.clone()).collect(),
            entries,
            &pairs,
            lambda_fq,
            k_medial,
        )
    }
}

/// Candidate pool for sampling and sound change: every consonant of the IPA
/// inventory.
fn pool() -> Vec<(String, FeatureVector)> {
    PhonemeInventory::ipa()
        .consonants()
        .iter()
        .map(|(s, v)| (s.to_string(), *v))
        .collect()
}

fn l1(a: &FeatureVector, b: &FeatureVector) -> f64 {
    a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).sum()
}

/// Draws the ground-truth initials and the characters belonging to each.
pub fn sample_system<R: Rng>(cfg: &GenerationConfig, rng: &mut R) -> Result<(Vec<Initial>, Vec<Character>), SynthError> {
    cfg.validate()?;
    let chosen: Vec<(String, FeatureVector)> = match cfg.system_source {
        SystemSource::Named(name) => {
            let inv = PhonemeInventory::ipa();
            name.symbols()
                .iter()
                .map(|s| inv.resolve(s).expect("named systems use inventory symbols"))
                .collect()
        }
        SystemSource::Sampled => {
            let pool = pool();
            if pool.len() < cfg.m_range.1 {
                return Err(SynthError::InventoryTooSmall { available: pool.len(), needed: cfg.m_range.1 });
            }
            let m = rng.gen_range(cfg.m_range.0..=cfg.m_range.1);
            let mut picks = sample(rng, pool.len(), m).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|i| pool[i].clone()).collect()
        }
    };
    let width = digits(chosen.len());
    let initials: Vec<Initial> = chosen
        .into_iter()
        .enumerate()
        .map(|(i, (symbol, vector))| Initial { id: format!("I{i:0width$}"), symbol, vector })
        .collect();
    let counts: Vec<usize> = initials.iter().map(|_| rng.gen_range(cfg.n_range.0..=cfg.n_range.1)).collect();
    let total: usize = counts.iter().sum();
    let width = digits(total);
    let mut characters = Vec::with_capacity(total);
    for (i, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            characters.push(Character { id: format!("c{:0width$}", characters.len()), initial: i });
        }
    }
    Ok((initials, characters))
}

fn digits(n: usize) -> usize {
    n.saturating_sub(1).to_string().len().max(2)
}

/// One upper speller per character. Characters whose initial has no other
/// member get no faithful pair and are skipped unless the draw corrupts them.
pub fn derive_fanqie<R: Rng>(characters: &[Character], num_initials: usize, p_fq: f64, rng: &mut R) -> Vec<SyntheticPair> {
    let mut by_initial: Vec<Vec<usize>> = vec![Vec::new(); num_initials];
    for (i, c) in characters.iter().enumerate() {
        by_initial[c.initial].push(i);
    }
    let mut pairs = Vec::with_capacity(characters.len());
    for (x, c) in characters.iter().enumerate() {
        let corrupted = rng.gen_bool(p_fq);
        if corrupted {
            let others: Vec<usize> = (0..num_initials)
                .filter(|&i| i != c.initial && !by_initial[i].is_empty())
                .collect();
            if others.is_empty() {
                continue;
            }
            let target = &by_initial[others[rng.gen_range(0..others.len())]];
            pairs.push(SyntheticPair { x, xu: target[rng.gen_range(0..target.len())], corrupted: true });
        } else {
            let same = &by_initial[c.initial];
            if same.len() < 2 {
                continue;
            }
            let pos = same.iter().position(|&y| y == x).expect("character listed under its initial");
            let mut k = rng.gen_range(0..same.len() - 1);
            if k >= pos {
                k += 1;
            }
            pairs.push(SyntheticPair { x, xu: same[k], corrupted: false });
        }
    }
    pairs
}

/// Redraws a phoneme from the pool, never returning the source itself.
struct ChangeSampler {
    pool: Vec<(String, FeatureVector)>,
    uniform: bool,
    tables: HashMap<usize, WeightedIndex<f64>>,
}

impl ChangeSampler {
    fn new(uniform: bool) -> Self {
        ChangeSampler { pool: pool(), uniform, tables: HashMap::new() }
    }

    fn index_of(&self, symbol: &str) -> Option<usize> {
        self.pool.iter().position(|(s, _)| s == symbol)
    }

    fn redraw<R: Rng>(&mut self, source: &str, rng: &mut R) -> String {
        let src = self.index_of(source);
        let pool = &self.pool;
        let uniform = self.uniform;
        let key = src.unwrap_or(usize::MAX);
        let table = self.tables.entry(key).or_insert_with(|| {
            let origin = src.map(|i| pool[i].1).unwrap_or(FeatureVector::ZERO);
            let weights: Vec<f64> = pool
                .iter()
                .enumerate()
                .map(|(i, (_, v))| {
                    if Some(i) == src {
                        0.0
                    } else if uniform {
                        1.0
                    } else {
                        (-l1(&origin, v)).exp()
                    }
                })
                .collect();
            WeightedIndex::new(weights).expect("pool has more than one phoneme")
        });
        pool[table.sample(rng)].0.clone()
    }
}

/// Readings of every character in every variety.
pub fn generate_varieties<R: Rng>(
    initials: &[Initial],
    characters: &[Character],
    cfg: &GenerationConfig,
    rng: &mut R,
) -> Vec<Variety> {
    let mut sampler = ChangeSampler::new(cfg.uniform_change);
    let width = digits(cfg.num_varieties + 1);
    (0..cfg.num_varieties)
        .map(|v| {
            let regular: Vec<String> = initials
                .iter()
                .map(|i| {
                    if rng.gen_bool(cfg.p_dia) {
                        sampler.redraw(&i.symbol, rng)
                    } else {
                        i.symbol.clone()
                    }
                })
                .collect();
            let readings = characters
                .iter()
                .map(|c| {
                    let base = &regular[c.initial];
                    if rng.gen_bool(cfg.p_char) {
                        sampler.redraw(base, rng)
                    } else {
                        base.clone()
                    }
                })
                .collect();
            Variety { name: format!("v{:0width$}", v + 1), readings }
        })
        .collect()
}

/// Runs all three steps from `cfg.seed`.
pub fn generate(cfg: &GenerationConfig) -> Result<SyntheticDataset, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (initials, characters) = sample_system(cfg, &mut rng)?;
    let pairs = derive_fanqie(&characters, initials.len(), cfg.p_fq, &mut rng);
    let varieties = generate_varieties(&initials, &characters, cfg, &mut rng);
    Ok(SyntheticDataset { initials, characters, pairs, varieties })
}
