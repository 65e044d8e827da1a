//! IPA consonant inventory and symbol parsing.
//!
//! Base consonants come from the pulmonic chart (taps, flaps and trills
//! excluded) plus the common affricates. Each base may carry the secondary
//! diacritics `ʷ` (labialised), `ʲ` (palatalised) and `ʰ` (aspirated) where the
//! result is a distinct vector.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::schema::{Feature, FeatureSchema, FeatureVector, NUM_FEATURES};
use super::soundness::soundness_distance;
use super::PhonologyError;
use crate::metric::Metric;

/// Display/serialisation form of the zero initial. The canonical inventory key
/// is the empty string.
pub const ZERO_INITIAL_MARK: &str = "∅";

const ASPIRATED: char = 'ʰ';
const LABIALISED: char = 'ʷ';
const PALATALISED: char = 'ʲ';
/// Canonical diacritic order in emitted symbols.
const DIACRITICS: [char; 3] = [LABIALISED, PALATALISED, ASPIRATED];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Manner {
    Stop,
    Affricate,
    Fricative,
    Nasal,
    Liquid,
    Glide,
    LateralApproximant,
    LateralFricative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Place {
    Bilabial,
    Labiodental,
    Dental,
    Alveolar,
    Postalveolar,
    Retroflex,
    AlveoloPalatal,
    Palatal,
    Velar,
    Uvular,
    Pharyngeal,
    Glottal,
    LabialVelar,
    LabialPalatal,
}

use Manner::*;
use Place::*;

/// (symbol, manner, place, voiced)
const BASES: &[(&str, Manner, Place, bool)] = &[
    ("p", Stop, Bilabial, false),
    ("b", Stop, Bilabial, true),
    ("t̪", Stop, Dental, false),
    ("d̪", Stop, Dental, true),
    ("t", Stop, Alveolar, false),
    ("d", Stop, Alveolar, true),
    ("ʈ", Stop, Retroflex, false),
    ("ɖ", Stop, Retroflex, true),
    ("c", Stop, Palatal, false),
    ("ɟ", Stop, Palatal, true),
    ("k", Stop, Velar, false),
    ("ɡ", Stop, Velar, true),
    ("q", Stop, Uvular, false),
    ("ɢ", Stop, Uvular, true),
    ("ʔ", Stop, Glottal, false),
    ("pf", Affricate, Labiodental, false),
    ("bv", Affricate, Labiodental, true),
    ("tθ", Affricate, Dental, false),
    ("dð", Affricate, Dental, true),
    ("ts", Affricate, Alveolar, false),
    ("dz", Affricate, Alveolar, true),
    ("tʃ", Affricate, Postalveolar, false),
    ("dʒ", Affricate, Postalveolar, true),
    ("ʈʂ", Affricate, Retroflex, false),
    ("ɖʐ", Affricate, Retroflex, true),
    ("tɕ", Affricate, AlveoloPalatal, false),
    ("dʑ", Affricate, AlveoloPalatal, true),
    ("ɸ", Fricative, Bilabial, false),
    ("β", Fricative, Bilabial, true),
    ("f", Fricative, Labiodental, false),
    ("v", Fricative, Labiodental, true),
    ("θ", Fricative, Dental, false),
    ("ð", Fricative, Dental, true),
    ("s", Fricative, Alveolar, false),
    ("z", Fricative, Alveolar, true),
    ("ʃ", Fricative, Postalveolar, false),
    ("ʒ", Fricative, Postalveolar, true),
    ("ʂ", Fricative, Retroflex, false),
    ("ʐ", Fricative, Retroflex, true),
    ("ɕ", Fricative, AlveoloPalatal, false),
    ("ʑ", Fricative, AlveoloPalatal, true),
    ("ç", Fricative, Palatal, false),
    ("ʝ", Fricative, Palatal, true),
    ("x", Fricative, Velar, false),
    ("ɣ", Fricative, Velar, true),
    ("χ", Fricative, Uvular, false),
    ("ʁ", Fricative, Uvular, true),
    ("ħ", Fricative, Pharyngeal, false),
    ("ʕ", Fricative, Pharyngeal, true),
    ("h", Fricative, Glottal, false),
    ("ɦ", Fricative, Glottal, true),
    ("ɬ", LateralFricative, Alveolar, false),
    ("ɮ", LateralFricative, Alveolar, true),
    ("m", Nasal, Bilabial, true),
    ("ɱ", Nasal, Labiodental, true),
    ("n", Nasal, Alveolar, true),
    ("ɳ", Nasal, Retroflex, true),
    ("ȵ", Nasal, AlveoloPalatal, true),
    ("ɲ", Nasal, Palatal, true),
    ("ŋ", Nasal, Velar, true),
    ("ɴ", Nasal, Uvular, true),
    ("ɹ", Liquid, Alveolar, true),
    ("ɻ", Liquid, Retroflex, true),
    ("l", LateralApproximant, Alveolar, true),
    ("ɭ", LateralApproximant, Retroflex, true),
    ("ʎ", LateralApproximant, Palatal, true),
    ("ʟ", LateralApproximant, Velar, true),
    ("ʋ", Glide, Labiodental, true),
    ("j", Glide, Palatal, true),
    ("ɰ", Glide, Velar, true),
    ("w", Glide, LabialVelar, true),
    ("ɥ", Glide, LabialPalatal, true),
];

/// Alternative spellings accepted on input.
const ALIASES: &[(&str, &str)] = &[("g", "ɡ"), ("ʦ", "ts"), ("ʣ", "dz"), ("ʧ", "tʃ"), ("ʤ", "dʒ"), ("ʨ", "tɕ"), ("ʥ", "dʑ")];

fn base_vector(manner: Manner, place: Place, voiced: bool) -> FeatureVector {
    // continuant, delayed release, sonority
    let (cont, dr, son) = match manner {
        Stop => (-1.0, -1.0, 1.0),
        Affricate => (-1.0, 1.0, 1.0),
        Fricative | LateralFricative => (1.0, 1.0, 1.0),
        Nasal => (-1.0, 0.0, 2.0),
        Liquid | LateralApproximant => (1.0, 0.0, 3.0),
        Glide => (1.0, 0.0, 4.0),
    };
    // labial, labiodental, coronal, anterior, distributed, dorsal, high, front
    let (lab, ldl, cor, ant, dis, dor, hi, fr) = match place {
        Bilabial => (1.0, -1.0, -1.0, 0.0, 0.0, -1.0, 0.0, 0.0),
        Labiodental => (1.0, 1.0, -1.0, 0.0, 0.0, -1.0, 0.0, 0.0),
        Dental => (-1.0, 0.0, 1.0, 1.0, 1.0, -1.0, 0.0, 0.0),
        Alveolar => (-1.0, 0.0, 1.0, 1.0, -1.0, -1.0, 0.0, 0.0),
        Postalveolar => (-1.0, 0.0, 1.0, -1.0, 1.0, -1.0, 0.0, 0.0),
        Retroflex => (-1.0, 0.0, 1.0, -1.0, -1.0, -1.0, 0.0, 0.0),
        AlveoloPalatal => (-1.0, 0.0, 1.0, -1.0, 1.0, 1.0, 3.0, 3.0),
        Palatal => (-1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 3.0, 3.0),
        Velar => (-1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 3.0, 2.0),
        Uvular => (-1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 2.0, 1.0),
        Pharyngeal => (-1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 1.0, 1.0),
        Glottal => (-1.0, 0.0, -1.0, 0.0, 0.0, -1.0, 0.0, 0.0),
        LabialVelar => (1.0, -1.0, -1.0, 0.0, 0.0, 1.0, 3.0, 2.0),
        LabialPalatal => (1.0, -1.0, -1.0, 0.0, 0.0, 1.0, 3.0, 3.0),
    };
    let lateral = matches!(manner, LateralApproximant | LateralFricative);
    let voice = if voiced { 1.0 } else { -1.0 };
    let sg = if place == Glottal && manner == Fricative { 1.0 } else { -1.0 };
    FeatureVector([
        cont,
        dr,
        son,
        voice,
        sg,
        lab,
        ldl,
        cor,
        ant,
        dis,
        if lateral { 1.0 } else { -1.0 },
        dor,
        hi,
        fr,
    ])
}

/// Applies one diacritic; `None` when the combination is not supported.
fn apply_diacritic(v: &FeatureVector, mark: char) -> Option<FeatureVector> {
    let mut out = *v;
    match mark {
        ASPIRATED => {
            if v[Feature::Sonority] != 1.0 || v[Feature::SpreadGlottis] == 1.0 {
                return None;
            }
            out[Feature::SpreadGlottis] = 1.0;
        }
        LABIALISED => {
            if v[Feature::Labial] == 1.0 {
                return None;
            }
            out[Feature::Labial] = 1.0;
            out[Feature::Labiodental] = -1.0;
        }
        PALATALISED => {
            if v[Feature::Dorsal] == 1.0 {
                return None;
            }
            out[Feature::Dorsal] = 1.0;
            out[Feature::High] = 3.0;
            out[Feature::Front] = 3.0;
        }
        _ => return None,
    }
    Some(out)
}

fn lookup_base(symbol: &str) -> Option<(&'static str, FeatureVector)> {
    let canonical = ALIASES
        .iter()
        .find(|(alias, _)| *alias == symbol)
        .map(|(_, c)| *c)
        .unwrap_or(symbol);
    BASES
        .iter()
        .find(|(s, ..)| *s == canonical)
        .map(|&(s, m, p, v)| (s, base_vector(m, p, v)))
}

/// Splits trailing diacritics off a symbol. Returns the base and the set of
/// diacritics present, or `None` if a diacritic repeats.
fn split_diacritics(symbol: &str) -> Option<(&str, [bool; 3])> {
    let mut marks = [false; 3];
    let mut base = symbol;
    while let Some(c) = base.chars().next_back() {
        let Some(pos) = DIACRITICS.iter().position(|&d| d == c) else {
            break;
        };
        if marks[pos] {
            return None;
        }
        marks[pos] = true;
        base = &base[..base.len() - c.len_utf8()];
    }
    Some((base, marks))
}

fn is_zero_symbol(symbol: &str) -> bool {
    matches!(symbol, "" | ZERO_INITIAL_MARK | "0" | "Ø")
}

/// Parses an IPA initial into its feature vector without consulting the
/// duplicate filter of [`PhonemeInventory::ipa`].
fn parse_unchecked(symbol: &str) -> Result<(String, FeatureVector), PhonologyError> {
    let trimmed = symbol.trim();
    if is_zero_symbol(trimmed) {
        return Ok((String::new(), FeatureVector::ZERO));
    }
    let unknown = || PhonologyError::UnknownSymbol(symbol.to_string());
    let (base, marks) = split_diacritics(trimmed).ok_or_else(unknown)?;
    let (base_sym, mut v) = lookup_base(base).ok_or_else(unknown)?;
    let mut canonical = base_sym.to_string();
    for (i, &mark) in DIACRITICS.iter().enumerate() {
        if marks[i] {
            v = apply_diacritic(&v, mark).ok_or_else(unknown)?;
            canonical.push(mark);
        }
    }
    Ok((canonical, v))
}

/// Parses an IPA initial (base consonant plus optional `ʷ`, `ʲ`, `ʰ`) into a
/// feature vector. The empty string and `∅` denote the zero initial.
pub fn parse_phoneme(symbol: &str, schema: &FeatureSchema) -> Result<FeatureVector, PhonologyError> {
    let (canonical, v) = parse_unchecked(symbol)?;
    // Combinations that collapse onto another phoneme are not part of the
    // inventory grammar.
    if !PhonemeInventory::ipa().contains(&canonical) {
        return Err(PhonologyError::UnknownSymbol(symbol.to_string()));
    }
    debug_assert!(schema.in_range(&v));
    Ok(v)
}

/// Canonical spelling of a parseable symbol.
pub fn canonical_symbol(symbol: &str) -> Result<String, PhonologyError> {
    parse_unchecked(symbol).map(|(s, _)| s)
}

/// Mapping from IPA symbol to feature vector, ordered by symbol.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PhonemeInventory {
    entries: BTreeMap<String, FeatureVector>,
}

impl PhonemeInventory {
    pub fn new() -> Self {
        Self::default()
    }

    /// The full IPA inventory: every base consonant, every distinct diacritic
    /// combination, and the zero initial.
    pub fn ipa() -> &'static PhonemeInventory {
        static INV: std::sync::OnceLock<PhonemeInventory> = std::sync::OnceLock::new();
        INV.get_or_init(|| {
            let mut inv = PhonemeInventory::new();
            inv.insert_unique(String::new(), FeatureVector::ZERO);
            for &(sym, m, p, voiced) in BASES {
                inv.insert_unique(sym.to_string(), base_vector(m, p, voiced));
            }
            // Fewer diacritics win when two spellings collapse onto one vector.
            let mut masks: Vec<u8> = (1u8..8).collect();
            masks.sort_by_key(|m| m.count_ones());
            for mask in masks {
                for &(sym, m, p, voiced) in BASES {
                    let base = base_vector(m, p, voiced);
                    let mut v = Some(base);
                    let mut s = sym.to_string();
                    for (i, &mark) in DIACRITICS.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            v = v.and_then(|v| apply_diacritic(&v, mark));
                            s.push(mark);
                        }
                    }
                    if let Some(v) = v {
                        inv.insert_unique(s, v);
                    }
                }
            }
            inv
        })
    }

    /// Inserts unless the vector is already present under another symbol.
    /// Returns whether the entry was added.
    fn insert_unique(&mut self, symbol: String, v: FeatureVector) -> bool {
        if self.entries.values().any(|w| *w == v) {
            return false;
        }
        self.entries.insert(symbol, v);
        true
    }

    /// Builds a sub-inventory from symbols, resolving each against the IPA
    /// inventory.
    pub fn from_symbols<'a>(symbols: impl IntoIterator<Item = &'a str>) -> Result<Self, PhonologyError> {
        let schema = FeatureSchema::standard();
        let mut inv = PhonemeInventory::new();
        for s in symbols {
            let v = parse_phoneme(s, schema)?;
            let canonical = canonical_symbol(s)?;
            if !inv.insert_unique(canonical, v) {
                return Err(PhonologyError::DuplicateVector(s.to_string()));
            }
        }
        Ok(inv)
    }

    /// Adds an arbitrary entry, rejecting duplicate vectors or symbols.
    pub fn insert(&mut self, symbol: impl Into<String>, v: FeatureVector) -> Result<(), PhonologyError> {
        let symbol = symbol.into();
        if self.entries.contains_key(&symbol) || !self.insert_unique(symbol.clone(), v) {
            return Err(PhonologyError::DuplicateVector(symbol));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.entries.contains_key(symbol)
    }

    pub fn get(&self, symbol: &str) -> Option<&FeatureVector> {
        self.entries.get(symbol)
    }

    /// Looks up a symbol, accepting aliases and the zero-initial mark.
    pub fn resolve(&self, symbol: &str) -> Result<(String, FeatureVector), PhonologyError> {
        let canonical = canonical_symbol(symbol)?;
        self.entries
            .get(&canonical)
            .map(|v| (canonical.clone(), *v))
            .ok_or_else(|| PhonologyError::UnknownSymbol(symbol.to_string()))
    }

    /// Symbol whose vector equals `v` exactly.
    pub fn symbol_of(&self, v: &FeatureVector) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, w)| *w == v)
            .map(|(s, _)| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FeatureVector)> + '_ {
        self.entries.iter().map(|(s, v)| (s.as_str(), v))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    /// Same inventory without the zero initial.
    pub fn consonants(&self) -> PhonemeInventory {
        PhonemeInventory {
            entries: self
                .entries
                .iter()
                .filter(|(s, _)| !s.is_empty())
                .map(|(s, v)| (s.clone(), *v))
                .collect(),
        }
    }

    /// Serialises as tab-separated text with a header row of feature names.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("symbol");
        for f in Feature::ALL {
            out.push('\t');
            out.push_str(f.name());
        }
        out.push('\n');
        for (s, v) in &self.entries {
            out.push_str(display_symbol(s));
            for x in v.values() {
                let _ = write!(out, "\t{x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, PhonologyError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| PhonologyError::Format { line: 1, message: "missing header".into() })?;
        let cols: Vec<&str> = header.split('\t').collect();
        let expected: Vec<&str> = std::iter::once("symbol")
            .chain(Feature::ALL.iter().map(|f| f.name()))
            .collect();
        if cols != expected {
            return Err(PhonologyError::Format { line: 1, message: "unexpected header".into() });
        }
        let mut inv = PhonemeInventory::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != NUM_FEATURES + 1 {
                return Err(PhonologyError::Format {
                    line: i + 1,
                    message: format!("expected {} columns, found {}", NUM_FEATURES + 1, fields.len()),
                });
            }
            let mut v = [0.0; NUM_FEATURES];
            for (slot, field) in v.iter_mut().zip(&fields[1..]) {
                *slot = field.trim().parse().map_err(|_| PhonologyError::Format {
                    line: i + 1,
                    message: format!("bad number {field:?}"),
                })?;
            }
            let symbol = if is_zero_symbol(fields[0]) { String::new() } else { fields[0].to_string() };
            inv.insert(symbol, FeatureVector(v))?;
        }
        Ok(inv)
    }
}

/// Symbol as written to files and reports (`∅` for the zero initial).
pub fn display_symbol(symbol: &str) -> &str {
    if symbol.is_empty() {
        ZERO_INITIAL_MARK
    } else {
        symbol
    }
}

/// Symbol in `inv` closest to `v` under the feature metric. Ties go to the
/// lexicographically smallest symbol.
pub fn nearest_phoneme<'a>(v: &FeatureVector, inv: &'a PhonemeInventory, metric: &Metric) -> Option<&'a str> {
    let mut best: Option<(&str, f64)> = None;
    for (s, w) in inv.iter() {
        let d = metric.distance(v, w);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((s, d));
        }
    }
    best.map(|(s, _)| s)
}

/// Checks the inventory invariants: every vector sound, no duplicates.
pub fn validate_inventory(inv: &PhonemeInventory, schema: &FeatureSchema) -> Result<(), PhonologyError> {
    let mut seen: Vec<&FeatureVector> = Vec::with_capacity(inv.len());
    for (s, v) in inv.iter() {
        if !schema.in_range(v) {
            return Err(PhonologyError::OutOfRange(s.to_string()));
        }
        if soundness_distance(v, schema) != 0.0 {
            return Err(PhonologyError::Unsound(s.to_string()));
        }
        if seen.contains(&v) {
            return Err(PhonologyError::DuplicateVector(s.to_string()));
        }
        seen.push(v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> &'static FeatureSchema {
        FeatureSchema::standard()
    }

    #[test]
    fn m_and_f_columns() {
        let m = parse_phoneme("m", schema()).unwrap();
        assert_eq!(
            m.0,
            [-1.0, 0.0, 2.0, 1.0, -1.0, 1.0, -1.0, -1.0, 0.0, 0.0, -1.0, -1.0, 0.0, 0.0]
        );
        let f = parse_phoneme("f", schema()).unwrap();
        assert_eq!(
            f.0,
            [1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 0.0, 0.0, -1.0, -1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn zero_initial_parses_to_zero() {
        assert_eq!(parse_phoneme("", schema()).unwrap(), FeatureVector::ZERO);
        assert_eq!(parse_phoneme("∅", schema()).unwrap(), FeatureVector::ZERO);
    }

    #[test]
    fn aspiration_sets_spread_glottis() {
        let k = parse_phoneme("k", schema()).unwrap();
        let kh = parse_phoneme("kʰ", schema()).unwrap();
        assert_eq!(kh[Feature::SpreadGlottis], 1.0);
        let mut expected = k;
        expected[Feature::SpreadGlottis] = 1.0;
        assert_eq!(kh, expected);
    }

    #[test]
    fn diacritic_order_is_free_on_input() {
        assert_eq!(canonical_symbol("kʰʷ").unwrap(), "kʷʰ");
        assert_eq!(
            parse_phoneme("tʰʲ", schema()).unwrap(),
            parse_phoneme("tʲʰ", schema()).unwrap()
        );
    }

    #[test]
    fn unknown_symbols_are_rejected() {
        for bad in ["ʘq!", "r", "ɾ", "kʰʰ", "mʰ", "pʷ", "kʲ", "ɰʷ", "ʃʲ"] {
            assert!(
                matches!(parse_phoneme(bad, schema()), Err(PhonologyError::UnknownSymbol(_))),
                "{bad} should be rejected"
            );
        }
    }

    #[test]
    fn aliases_resolve() {
        assert_eq!(parse_phoneme("g", schema()).unwrap(), parse_phoneme("ɡ", schema()).unwrap());
        assert_eq!(canonical_symbol("ʦ").unwrap(), "ts");
    }

    #[test]
    fn full_inventory_is_valid() {
        let inv = PhonemeInventory::ipa();
        validate_inventory(inv, schema()).unwrap();
        assert!(inv.len() > 150, "inventory has {} entries", inv.len());
        assert!(inv.contains(""));
    }

    #[test]
    fn every_symbol_parses_to_its_vector() {
        for (s, v) in PhonemeInventory::ipa().iter() {
            assert_eq!(parse_phoneme(s, schema()).unwrap(), *v, "{s}");
        }
    }

    #[test]
    fn tsv_round_trip() {
        let inv = PhonemeInventory::from_symbols(["p", "pʰ", "m", "", "tɕʰ"]).unwrap();
        let text = inv.to_tsv();
        assert!(text.starts_with("symbol\tcontinuant\tdelayed_release"));
        assert_eq!(PhonemeInventory::from_tsv(&text).unwrap(), inv);
    }

    #[test]
    fn nearest_prefers_exact_and_zero() {
        let metric = Metric::default();
        let inv = PhonemeInventory::from_symbols(["p", "f", "m", "", "s"]).unwrap();
        let f = *inv.get("f").unwrap();
        assert_eq!(nearest_phoneme(&f, &inv, &metric), Some("f"));
        assert_eq!(nearest_phoneme(&FeatureVector::ZERO, &inv, &metric), Some(""));
    }

    #[test]
    fn nearest_is_identity_on_inventory() {
        let metric = Metric::default();
        let inv = PhonemeInventory::ipa();
        for (s, v) in inv.iter() {
            assert_eq!(nearest_phoneme(v, inv, &metric), Some(s));
        }
    }
}
