//! Generator to reconstruction to downstream analyses, through the on-disk
//! dataset format.

use protophon::clustering::{ami, kmeans, Labeling};
use protophon::dataset::{read_dataset, write_synthetic};
use protophon::eval::{equal_rate, sound_rate};
use protophon::geometry::{disagreement, pdia_lower_bound};
use protophon::reconstruct::{reconstruct, ReconstructOptions};
use protophon::synthgen::{generate, GenerationConfig};
use protophon::{nearest_phoneme, parse_phoneme, Feature, FeatureSchema, Metric, PhonemeInventory};

fn config(p_dia: f64) -> GenerationConfig {
    GenerationConfig {
        m_range: (6, 6),
        n_range: (5, 5),
        num_varieties: 4,
        p_fq: 0.0,
        p_dia,
        p_char: 0.0,
        seed: 11,
        ..Default::default()
    }
}

#[test]
fn zero_noise_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(&config(0.0)).unwrap();
    write_synthetic(dir.path(), &data).unwrap();
    let ds = read_dataset(dir.path(), false).unwrap();
    let problem = ds.problem(0.5, 1.0).unwrap();
    let r = reconstruct(&problem, &ReconstructOptions::default()).unwrap();
    let truth = ds.truth.as_ref().unwrap();
    assert_eq!(equal_rate(&r.vectors, truth).unwrap(), 1.0);
    assert_eq!(sound_rate(&r.vectors), 1.0);

    let points: Vec<Vec<f64>> = r.vectors.iter().map(|v| v.0.to_vec()).collect();
    let clusters = kmeans(&points, 6, 0, 5).unwrap();
    let categories = Labeling::from_keys(ds.entries.iter().map(|e| e.category.clone().unwrap()));
    assert!((ami(&clusters.labeling, &categories).unwrap() - 1.0).abs() < 1e-12);

    let columns: Vec<_> = ds
        .varieties
        .iter()
        .enumerate()
        .map(|(vi, n)| (n.clone(), ds.entries.iter().map(|e| e.readings[vi]).collect()))
        .collect();
    assert_eq!(pdia_lower_bound(&disagreement(&columns).unwrap()), 0.0);
}

#[test]
fn dialect_change_raises_the_lower_bound() {
    let data = generate(&config(0.6)).unwrap();
    let problem = data.to_problem(0.5, 1.0).unwrap();
    let columns: Vec<_> = problem
        .varieties
        .iter()
        .enumerate()
        .map(|(vi, n)| (n.clone(), problem.entries.iter().map(|e| e.readings[vi]).collect()))
        .collect();
    let m = disagreement(&columns).unwrap();
    let bound = pdia_lower_bound(&m);
    let max = m.values.iter().flatten().copied().fold(0.0, f64::max);
    assert!(bound > 0.0);
    assert!(bound >= max / 2.0 - 1e-9 && bound <= max + 1e-9);
}

#[test]
fn perturbed_vector_snaps_to_nearest_phoneme() {
    let mut v = parse_phoneme("m", FeatureSchema::standard()).unwrap();
    v[Feature::Voice] -= 0.05;
    assert_eq!(nearest_phoneme(&v, PhonemeInventory::ipa(), &Metric::default()), Some("m"));
}
