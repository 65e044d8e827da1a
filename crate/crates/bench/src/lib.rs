//! Shared fixtures for the benchmarks.

use protophon::milp::ReconstructionProblem;
use protophon::synthgen::{generate, GenerationConfig};
use protophon::{FeatureSchema, FeatureVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Noisy synthetic problem with `initials` initials of `chars` characters
/// each, read in `varieties` varieties.
pub fn synthetic_problem(initials: usize, chars: usize, varieties: usize, seed: u64) -> ReconstructionProblem {
    let cfg = GenerationConfig {
        m_range: (initials, initials),
        n_range: (chars, chars),
        num_varieties: varieties,
        p_fq: 0.1,
        p_dia: 0.3,
        p_char: 0.3,
        seed,
        ..Default::default()
    };
    generate(&cfg).expect("valid config").to_problem(0.5, 1.0).expect("valid problem")
}

pub fn random_vectors(n: usize, seed: u64) -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut v = FeatureVector::ZERO;
            for d in FeatureSchema::standard().features() {
                v[d.feature] = rng.gen_range(d.min..=d.max);
            }
            v
        })
        .collect()
}

pub fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

pub fn random_labels(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}
