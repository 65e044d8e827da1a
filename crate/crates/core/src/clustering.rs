//! KMeans over reconstructed vectors and adjusted mutual information between
//! labelings.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("{distinct} distinct points cannot form {k} clusters")]
    TooFewPoints { k: usize, distinct: usize },
    #[error("labelings cover {0} and {1} entries")]
    IdMismatch(usize, usize),
    #[error("points have inconsistent dimensions")]
    Dimension,
}

/// Dense cluster labels in `[0, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    pub labels: Vec<usize>,
    pub k: usize,
}

impl Labeling {
    /// Relabels arbitrary keys densely in order of first appearance.
    pub fn from_keys<T: std::hash::Hash + Eq>(keys: impl IntoIterator<Item = T>) -> Self {
        let mut ids: HashMap<T, usize> = HashMap::new();
        let labels: Vec<usize> = keys
            .into_iter()
            .map(|key| {
                let next = ids.len();
                *ids.entry(key).or_insert(next)
            })
            .collect();
        Labeling { labels, k: ids.len() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    pub labeling: Labeling,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squares.
    pub wcss: f64,
    pub iterations: usize,
}

pub const KMEANS_MAX_ITER: usize = 500;
pub const KMEANS_TOL: f64 = 1e-8;

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centroids.iter().enumerate() {
        let d = sq(p, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut idx = d2.iter().rposition(|&d| d > 0.0).unwrap_or(0);
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && r < d {
                    idx = i;
                    break;
                }
                r -= d;
            }
            idx
        } else {
            rng.gen_range(0..points.len())
        };
        centroids.push(points[pick].clone());
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(sq(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], k: usize, mut centroids: Vec<Vec<f64>>) -> KMeansResult {
    let dim = points[0].len();
    let mut labels = vec![0usize; points.len()];
    let mut iterations = 0;
    loop {
        iterations += 1;
        for (l, p) in labels.iter_mut().zip(points) {
            *l = nearest(p, &centroids).0;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&l, p) in labels.iter().zip(points) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        // An empty cluster takes the point farthest from its centroid.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..points.len())
                    .filter(|&i| counts[labels[i]] > 1)
                    .max_by(|&a, &b| {
                        sq(&points[a], &centroids[labels[a]]).total_cmp(&sq(&points[b], &centroids[labels[b]])).then(b.cmp(&a))
                    });
                if let Some(i) = far {
                    let old = labels[i];
                    counts[old] -= 1;
                    for (s, x) in sums[old].iter_mut().zip(&points[i]) {
                        *s -= x;
                    }
                    labels[i] = c;
                    counts[c] = 1;
                    sums[c] = points[i].clone();
                }
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let m: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq(&m, &centroids[c]).sqrt());
            centroids[c] = m;
        }
        if shift < KMEANS_TOL || iterations >= KMEANS_MAX_ITER {
            break;
        }
    }
    for (l, p) in labels.iter_mut().zip(points) {
        *l = nearest(p, &centroids).0;
    }
    let wcss = labels.iter().zip(points).map(|(&l, p)| sq(p, &centroids[l])).sum();
    KMeansResult { labeling: Labeling { labels, k }, centroids, wcss, iterations }
}

/// Best of `restarts` seeded k-means++ runs by within-cluster sum of squares.
/// Restart `r` draws from stream `r` of the seed, so the result does not
/// depend on thread scheduling.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<KMeansResult, ClusterError> {
    if points.iter().any(|p| p.len() != points.first().map_or(0, Vec::len)) {
        return Err(ClusterError::Dimension);
    }
    let mut distinct: Vec<&Vec<f64>> = points.iter().collect();
    distinct.sort_by(|a, b| a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    distinct.dedup();
    if k == 0 || k > distinct.len() {
        return Err(ClusterError::TooFewPoints { k, distinct: distinct.len() });
    }
    let runs: Vec<KMeansResult> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let init = plus_plus(points, k, &mut rng);
            lloyd(points, k, init)
        })
        .collect();
    Ok(runs
        .into_iter()
        .reduce(|best, r| if r.wcss < best.wcss { r } else { best })
        .expect("at least one restart"))
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

struct Contingency {
    a: Vec<usize>,
    b: Vec<usize>,
    cells: BTreeMap<(usize, usize), usize>,
    n: usize,
}

fn contingency(u: &Labeling, v: &Labeling) -> Contingency {
    let mut a = vec![0; u.k];
    let mut b = vec![0; v.k];
    let mut cells = BTreeMap::new();
    for (&x, &y) in u.labels.iter().zip(&v.labels) {
        a[x] += 1;
        b[y] += 1;
        *cells.entry((x, y)).or_insert(0) += 1;
    }
    Contingency { a, b, cells, n: u.labels.len() }
}

pub fn mutual_information(u: &Labeling, v: &Labeling) -> Result<f64, ClusterError> {
    if u.len() != v.len() {
        return Err(ClusterError::IdMismatch(u.len(), v.len()));
    }
    let c = contingency(u, v);
    let n = c.n as f64;
    Ok(c.cells
        .iter()
        .map(|(&(i, j), &nij)| {
            let nij = nij as f64;
            nij / n * (n * nij / (c.a[i] as f64 * c.b[j] as f64)).ln()
        })
        .sum())
}

/// Expected mutual information of two labelings with the given marginals
/// under the hypergeometric (random permutation) model.
pub fn expected_mutual_information(a: &[usize], b: &[usize], n: usize) -> f64 {
    let mut lf = vec![0.0f64; n + 1];
    for i in 1..=n {
        lf[i] = lf[i - 1] + (i as f64).ln();
    }
    let nf = n as f64;
    let mut e = 0.0;
    for &ai in a.iter().filter(|&&x| x > 0) {
        for &bj in b.iter().filter(|&&x| x > 0) {
            let lo = (ai + bj).saturating_sub(n).max(1);
            let hi = ai.min(bj);
            let fixed = lf[ai] + lf[bj] + lf[n - ai] + lf[n - bj] - lf[n];
            for nij in lo..=hi {
                let x = nij as f64;
                let log_p = fixed - lf[nij] - lf[ai - nij] - lf[bj - nij] - lf[n + nij - ai - bj];
                e += x / nf * (nf * x / (ai as f64 * bj as f64)).ln() * log_p.exp();
            }
        }
    }
    e
}

/// Adjusted mutual information with the arithmetic mean of the entropies in
/// the denominator. Labelings whose denominator vanishes (both trivial) score
/// 0 with a warning.
pub fn ami(u: &Labeling, v: &Labeling) -> Result<f64, ClusterError> {
    if u.len() != v.len() {
        return Err(ClusterError::IdMismatch(u.len(), v.len()));
    }
    let c = contingency(u, v);
    let n = c.n as f64;
    let mi = mutual_information(u, v)?;
    let emi = expected_mutual_information(&c.a, &c.b, c.n);
    let avg = 0.5 * (entropy(&c.a, n) + entropy(&c.b, n));
    let denom = avg - emi;
    if denom.abs() < 1e-15 {
        log::warn!("degenerate labelings; AMI reported as 0");
        return Ok(0.0);
    }
    Ok((mi - emi) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_labels(n: usize, k: usize, seed: u64) -> Labeling {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        Labeling::from_keys(raw)
    }

    /// E[MI] by enumerating every permutation of the second labeling.
    fn brute_emi(u: &[usize], v: &[usize]) -> f64 {
        fn perms(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
            if k == items.len() {
                out.push(items.clone());
                return;
            }
            for i in k..items.len() {
                items.swap(k, i);
                perms(items, k + 1, out);
                items.swap(k, i);
            }
        }
        let mut all = Vec::new();
        perms(&mut v.to_vec(), 0, &mut all);
        let lu = Labeling::from_keys(u.iter().copied());
        let total: f64 = all
            .iter()
            .map(|p| mutual_information(&lu, &Labeling::from_keys(p.iter().copied())).unwrap())
            .sum();
        total / all.len() as f64
    }

    #[test]
    fn emi_matches_permutation_average() {
        let u = [0, 0, 1, 1];
        let v = [0, 0, 0, 1];
        let c = contingency(&Labeling::from_keys(u), &Labeling::from_keys(v));
        let exact = expected_mutual_information(&c.a, &c.b, 4);
        assert!((exact - brute_emi(&u, &v)).abs() < 1e-12);
        let u = [0, 1, 1, 2, 2, 2];
        let v = [0, 0, 1, 1, 2, 0];
        let c = contingency(&Labeling::from_keys(u), &Labeling::from_keys(v));
        assert!((expected_mutual_information(&c.a, &c.b, 6) - brute_emi(&u, &v)).abs() < 1e-12);
    }

    #[test]
    fn swapped_point_hand_case() {
        let u = Labeling::from_keys([0, 0, 1, 1]);
        let v = Labeling::from_keys([0, 0, 0, 1]);
        let mi = mutual_information(&u, &v).unwrap();
        let emi = brute_emi(&[0, 0, 1, 1], &[0, 0, 0, 1]);
        let hu = 2f64.ln();
        let hv = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let expected = (mi - emi) / (0.5 * (hu + hv) - emi);
        assert!((ami(&u, &v).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn identical_labelings_score_one() {
        for seed in 0..10 {
            let u = random_labels(200, 7, seed);
            assert!((ami(&u, &u).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn random_labelings_near_zero() {
        for seed in 0..5 {
            let a = ami(&random_labels(1000, 10, seed), &random_labels(1000, 10, seed + 100)).unwrap();
            assert!(a.abs() < 0.05, "{a}");
        }
    }

    #[test]
    fn single_cluster_is_degenerate_zero() {
        let u = Labeling::from_keys([0, 0, 0]);
        assert_eq!(ami(&u, &u).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(ami(&Labeling::from_keys([0, 1]), &Labeling::from_keys([0])).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_permutation_invariant(raw_u in prop::collection::vec(0usize..4, 12), raw_v in prop::collection::vec(0usize..5, 12)) {
            let u = Labeling::from_keys(raw_u.iter().copied());
            let v = Labeling::from_keys(raw_v.iter().copied());
            let a = ami(&u, &v).unwrap();
            prop_assert!((a - ami(&v, &u).unwrap()).abs() < 1e-10);
            let relabeled = Labeling::from_keys(raw_u.iter().map(|x| 7 - x));
            prop_assert!((a - ami(&relabeled, &v).unwrap()).abs() < 1e-10);
            prop_assert!(a <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn kmeans_each_point_own_cluster() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let r = kmeans(&pts, 6, 1, 3).unwrap();
        assert_eq!(r.wcss, 0.0);
        let mut l = r.labeling.labels.clone();
        l.sort();
        l.dedup();
        assert_eq!(l.len(), 6);
    }

    #[test]
    fn kmeans_separates_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pts = Vec::new();
        for c in [0.0, 100.0] {
            for _ in 0..30 {
                pts.push(vec![c + rng.gen::<f64>(), c - rng.gen::<f64>()]);
            }
        }
        let r = kmeans(&pts, 2, 7, 4).unwrap();
        let truth = Labeling::from_keys((0..60).map(|i| i / 30));
        assert_eq!(ami(&r.labeling, &truth).unwrap(), 1.0);
    }

    #[test]
    fn kmeans_deterministic_and_validated() {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i % 3) as f64]).collect();
        assert_eq!(kmeans(&pts, 4, 9, 5).unwrap(), kmeans(&pts, 4, 9, 5).unwrap());
        assert!(matches!(kmeans(&pts, 22, 0, 1), Err(ClusterError::TooFewPoints { .. })));
    }
}
