//! Pairwise variety disagreement, classical MDS and the smallest enclosing
//! ball, combined into a lower-bound estimate for the regular change rate.

use thiserror::Error;

use crate::phonology::FeatureVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("need at least two varieties")]
    TooFewVarieties,
    #[error("varieties {0:?} and {1:?} share no characters")]
    EmptyIntersection(String, String),
    #[error("matrix is not a valid disagreement matrix: {0}")]
    InvalidMatrix(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Symmetric matrix of disagreement fractions with a zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DisagreementMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl DisagreementMatrix {
    pub fn new(names: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        let m = DisagreementMatrix { names, values };
        m.validate()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Shape, range, symmetry, zero diagonal and the triangle inequality.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let n = self.values.len();
        let bad = |m: String| Err(GeometryError::InvalidMatrix(m));
        if self.names.len() != n || self.values.iter().any(|r| r.len() != n) {
            return bad("matrix is not square or names do not match".into());
        }
        const TOL: f64 = 1e-12;
        for i in 0..n {
            if self.values[i][i] != 0.0 {
                return bad(format!("nonzero diagonal at {i}"));
            }
            for j in 0..n {
                let d = self.values[i][j];
                if !(0.0..=1.0).contains(&d) {
                    return bad(format!("entry ({i}, {j}) = {d} outside [0, 1]"));
                }
                if (d - self.values[j][i]).abs() > TOL {
                    return bad(format!("asymmetric at ({i}, {j})"));
                }
                for k in 0..n {
                    if d > self.values[i][k] + self.values[k][j] + TOL {
                        return bad(format!("triangle inequality fails for ({i}, {k}, {j})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Tab-separated with a header row and a leading name column.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("variety");
        for n in &self.names {
            out.push('\t');
            out.push_str(n);
        }
        out.push('\n');
        for (n, row) in self.names.iter().zip(&self.values) {
            out.push_str(n);
            for v in row {
                out.push_str(&format!("\t{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, GeometryError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(GeometryError::Format { line: 1, message: "empty file".into() })?;
        let names: Vec<String> = header.split('\t').skip(1).map(str::to_string).collect();
        let mut values = Vec::new();
        for (i, (ln, line)) in lines.enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != names.len() + 1 || fields[0] != names.get(i).map_or("", String::as_str) {
                return Err(GeometryError::Format { line: ln + 1, message: "row does not match the header".into() });
            }
            let row = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| GeometryError::Format { line: ln + 1, message: format!("bad number {f:?}") })
                })
                .collect::<Result<Vec<_>, _>>()?;
            values.push(row);
        }
        DisagreementMatrix::new(names, values)
    }
}

/// Fraction of shared characters whose readings differ, for every pair of
/// varieties. `None` marks a missing reading.
pub fn disagreement(varieties: &[(String, Vec<Option<FeatureVector>>)]) -> Result<DisagreementMatrix, GeometryError> {
    let n = varieties.len();
    if n < 2 {
        return Err(GeometryError::TooFewVarieties);
    }
    let mut values = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let (mut shared, mut differ) = (0usize, 0usize);
            for (x, y) in varieties[a].1.iter().zip(&varieties[b].1) {
                if let (Some(x), Some(y)) = (x, y) {
                    shared += 1;
                    differ += usize::from(x != y);
                }
            }
            if shared == 0 {
                return Err(GeometryError::EmptyIntersection(varieties[a].0.clone(), varieties[b].0.clone()));
            }
            values[a][b] = differ as f64 / shared as f64;
            values[b][a] = values[a][b];
        }
    }
    Ok(DisagreementMatrix { names: varieties.iter().map(|v| v.0.clone()).collect(), values })
}

/// Eigenvalues and column eigenvectors of a symmetric matrix by cyclic
/// Jacobi rotations, sorted by decreasing eigenvalue.
pub fn symmetric_eigen(a: &[Vec<f64>], tol: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let scale = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off.sqrt() <= tol * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&i| v.iter().map(|row| row[i]).collect()).collect();
    (values, vectors)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    /// One coordinate row per input point.
    pub points: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Frobenius norm of the difference between the input distances and the
    /// embedded distances. Zero up to rounding for Euclidean inputs.
    pub distortion: f64,
}

/// Classical MDS: double-centre `-D²/2`, keep the positive eigenvalues.
pub fn mds_embed(d: &[Vec<f64>]) -> Embedding {
    let n = d.len();
    if n == 0 {
        return Embedding { points: Vec::new(), eigenvalues: Vec::new(), distortion: 0.0 };
    }
    let sq: Vec<Vec<f64>> = d.iter().map(|r| r.iter().map(|x| x * x).collect()).collect();
    let row: Vec<f64> = sq.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let all = row.iter().sum::<f64>() / n as f64;
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| -0.5 * (sq[i][j] - row[i] - row[j] + all)).collect())
        .collect();
    let (values, vectors) = symmetric_eigen(&b, 1e-12);
    let cutoff = 1e-12 * values.first().map_or(0.0, |v| v.abs()).max(1.0);
    let kept: Vec<usize> = (0..n).filter(|&k| values[k] > cutoff).collect();
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| kept.iter().map(|&k| vectors[k][i] * values[k].sqrt()).collect())
        .collect();
    let mut distortion = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            distortion += (e - d[i][j]).powi(2);
        }
    }
    Embedding { points, eigenvalues: values, distortion: distortion.sqrt() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Indices of the points on the boundary that certify optimality.
    pub support: Vec<usize>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Centre of the sphere through `support` within its affine hull, and the
/// barycentric weights of that centre. `None` if the points are affinely
/// dependent.
fn circumcenter(points: &[Vec<f64>], support: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
    let p0 = &points[support[0]];
    let m = support.len() - 1;
    let vs: Vec<Vec<f64>> = support[1..].iter().map(|&i| points[i].iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // 2·G·α = diag(G)
    let mut g: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut r: Vec<f64> = (0..m).map(|j| 2.0 * dot(&vs[i], &vs[j])).collect();
            r.push(dot(&vs[i], &vs[i]));
            r
        })
        .collect();
    let scale = g.iter().map(|r| r[m]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for c in 0..m {
        let piv = (c..m).max_by(|&a, &b| g[a][c].abs().total_cmp(&g[b][c].abs()))?;
        if g[piv][c].abs() < 1e-12 * scale {
            return None;
        }
        g.swap(c, piv);
        for r in 0..m {
            if r != c {
                let f = g[r][c] / g[c][c];
                for k in c..=m {
                    g[r][k] -= f * g[c][k];
                }
            }
        }
    }
    let alpha: Vec<f64> = (0..m).map(|i| g[i][m] / g[i][i]).collect();
    let mut center = p0.clone();
    for (a, v) in alpha.iter().zip(&vs) {
        for (c, x) in center.iter_mut().zip(v) {
            *c += a * x;
        }
    }
    let mut lambda = vec![1.0 - alpha.iter().sum::<f64>()];
    lambda.extend(alpha);
    Some((center, lambda))
}

/// Smallest ball enclosing all points.
///
/// Active-set iteration on the support set: the current ball is the
/// circumball of the support within its affine hull; support points with
/// negative barycentric weight are dropped, and the farthest outside point is
/// added, until every point is covered. On exit the centre is a convex
/// combination of equidistant support points that covers the input, which is
/// the optimality condition.
pub fn min_enclosing_ball(points: &[Vec<f64>]) -> Ball {
    if points.is_empty() {
        return Ball { center: Vec::new(), radius: 0.0, support: Vec::new() };
    }
    let far = |c: &[f64]| {
        (0..points.len())
            .map(|i| (i, dist(&points[i], c)))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
    };
    let (q, _) = far(&points[0]);
    let mut support = vec![q];
    let mut center = points[q].clone();
    let scale = far(&center).1.max(1.0);
    for _ in 0..10 * points.len() + 100 {
        let (p, d) = far(&center);
        let radius = dist(&points[support[0]], &center);
        if d <= radius + 1e-12 * scale {
            break;
        }
        support.push(p);
        loop {
            match circumcenter(points, &support) {
                Some((c, lambda)) => {
                    let worst = lambda[..lambda.len() - 1]
                        .iter()
                        .enumerate()
                        .filter(|(_, &l)| l < -1e-14)
                        .min_by(|a, b| a.1.total_cmp(b.1))
                        .map(|(i, _)| i);
                    match worst {
                        Some(i) => {
                            support.remove(i);
                        }
                        None => {
                            center = c;
                            break;
                        }
                    }
                }
                None => {
                    support.remove(0);
                }
            }
        }
    }
    let radius = points.iter().map(|p| dist(p, &center)).fold(0.0, f64::max);
    Ball { center, radius, support }
}

/// Radius of the smallest ball around the MDS embedding of the disagreement
/// matrix.
pub fn pdia_lower_bound(d: &DisagreementMatrix) -> f64 {
    min_enclosing_ball(&mds_embed(&d.values).points).radius
}
