//! Spectral clustering of the region graph (Ng-Jordan-Weiss variant).
//!
//! `L = I - D^{-1/2} W D^{-1/2}`; the eigenvectors of its `K` smallest
//! eigenvalues embed the regions, rows are scaled to unit length and a
//! k-means++ run on the rows gives the region labels.

use crate::error::{Error, Result};
use crate::numerics::rng::stage;
use crate::numerics::{sym_eigen, DataMatrix, RngState, SymMatrix};
use crate::quantize::{kmeans, KMeansConfig};

const EIGEN_TOL: f64 = 1e-12;
const EMBEDDING_RESTARTS: usize = 10;

fn check_graph(w: &SymMatrix, k: usize) -> Result<Vec<f64>> {
    let m = w.order();
    if k == 0 || k > m {
        return Err(Error::KFeasibility { k, m });
    }
    let mut degree = vec![0.0; m];
    for (i, deg) in degree.iter_mut().enumerate() {
        for j in 0..m {
            let v = w.get(i, j);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Dimension(format!(
                    "affinity entry ({i}, {j}) = {v} is not a finite nonnegative weight"
                )));
            }
            if i != j {
                *deg += v;
            }
        }
    }
    Ok(degree)
}

/// Symmetric normalized Laplacian of a weighted graph. Diagonal weights are
/// ignored.
pub fn normalized_laplacian(w: &SymMatrix) -> Result<SymMatrix> {
    let degree = check_graph(w, 1)?;
    if let Some(i) = degree.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedRegion(i));
    }
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
    Ok(SymMatrix::from_fn(w.order(), |i, j| if i == j { 1.0 } else { -w.get(i, j) * inv_sqrt[i] * inv_sqrt[j] }))
}

/// Row-normalized `m x K` spectral embedding of the graph. Zero rows stay
/// zero.
pub fn laplacian_embedding(w: &SymMatrix, k: usize) -> Result<DataMatrix> {
    check_graph(w, k)?;
    let lap = normalized_laplacian(w)?;
    let eig = sym_eigen(&lap, EIGEN_TOL)?;
    let m = w.order();
    let mut out = Vec::with_capacity(m * k);
    for i in 0..m {
        let row: Vec<f64> = (0..k).map(|j| eig.vector_component(i, j)).collect();
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            out.extend(row.iter().map(|v| v / norm));
        } else {
            out.extend(row);
        }
    }
    DataMatrix::new(m, k, out)
}

/// Relabels so that labels appear in first-occurrence order.
pub fn canonicalize(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<Option<usize>> = Vec::new();
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            if l >= map.len() {
                map.resize(l + 1, None);
            }
            *map[l].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

/// Clusters the `m` nodes of the affinity graph into `k` groups.
pub fn spectral_cluster(w: &SymMatrix, k: usize, rng: RngState) -> Result<Vec<usize>> {
    check_graph(w, k)?;
    let m = w.order();
    if k == 1 {
        return Ok(vec![0; m]);
    }
    let emb = laplacian_embedding(w, k)?;
    let cfg = KMeansConfig { restarts: EMBEDDING_RESTARTS, ..KMeansConfig::default() };
    let q = kmeans(&emb, k, &cfg, rng.fork(stage::SPECTRAL))?;
    let labels = canonicalize(q.assignment());
    let distinct = labels.iter().max().map_or(0, |&l| l + 1);
    if distinct != k {
        return Err(Error::KFeasibility { k, m });
    }
    Ok(labels)
}
