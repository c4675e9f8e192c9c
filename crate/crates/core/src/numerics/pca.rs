use super::eigen::sym_eigen;
use super::matrix::{DataMatrix, SymMatrix};
use crate::error::{Error, Result};

/// Projects the column-centered data onto its top `h` principal directions
/// (eigenvectors of the covariance, by descending eigenvalue).
pub fn pca(x: &DataMatrix, h: usize) -> Result<DataMatrix> {
    let (n, d) = (x.rows(), x.cols());
    if h == 0 || h > n.min(d) {
        return Err(Error::Dimension(format!("PCA target dimension {h} outside [1, {}]", n.min(d))));
    }
    let mean = x.column_means();
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let mut cov = vec![0.0; d * d];
    for r in x.iter_rows() {
        for i in 0..d {
            let ci = r[i] - mean[i];
            for j in 0..=i {
                cov[i * d + j] += ci * (r[j] - mean[j]);
            }
        }
    }
    let cov = SymMatrix::from_fn(d, |i, j| cov[i * d + j] / denom);
    let eig = sym_eigen(&cov, 1e-14)?;

    let mut out = Vec::with_capacity(n * h);
    for r in x.iter_rows() {
        for c in 0..h {
            let col = d - 1 - c;
            let mut s = 0.0;
            for k in 0..d {
                s += (r[k] - mean[k]) * eig.vector_component(k, col);
            }
            out.push(s);
        }
    }
    DataMatrix::new(n, h, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::sq_dist;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_cloud(n: usize, d: usize, seed: u64) -> DataMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        DataMatrix::new(n, d, v).unwrap()
    }

    fn variance(col: impl Iterator<Item = f64> + Clone) -> f64 {
        let n = col.clone().count() as f64;
        let mean = col.clone().sum::<f64>() / n;
        col.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn axis_aligned_points() {
        let x = DataMatrix::from_rows(&[[1.0, 5.0], [2.0, 5.0], [4.0, 5.0], [9.0, 5.0]]).unwrap();
        let p = pca(&x, 1).unwrap();
        let centered = [-3.0, -2.0, 0.0, 5.0];
        let sign = -p.get(0, 0).signum();
        for (i, c) in centered.iter().enumerate() {
            assert!((p.get(i, 0) - sign * c).abs() < 1e-12);
        }
    }

    #[test]
    fn full_rank_is_an_isometry() {
        let x = gaussian_cloud(30, 4, 1);
        let p = pca(&x, 4).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                let a = sq_dist(x.row(i), x.row(j)).sqrt();
                let b = sq_dist(p.row(i), p.row(j)).sqrt();
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn anisotropic_first_component_dominates() {
        // correlated 2-D cloud: (u, 0.5u + 0.3v) rotated
        let raw = gaussian_cloud(500, 2, 9);
        let rows: Vec<[f64; 2]> = raw.iter_rows().map(|r| [3.0 * r[0], 1.5 * r[0] + 0.3 * r[1]]).collect();
        let x = DataMatrix::from_rows(&rows).unwrap();
        let p = pca(&x, 1).unwrap();
        let vout = variance(p.as_slice().iter().copied());
        let v0 = variance(rows.iter().map(|r| r[0]));
        let v1 = variance(rows.iter().map(|r| r[1]));
        // oracle: top eigenvalue of the 2x2 covariance in closed form
        let n = rows.len() as f64;
        let (m0, m1) = (rows.iter().map(|r| r[0]).sum::<f64>() / n, rows.iter().map(|r| r[1]).sum::<f64>() / n);
        let c01 = rows.iter().map(|r| (r[0] - m0) * (r[1] - m1)).sum::<f64>() / (n - 1.0);
        let top = 0.5 * (v0 + v1) + (0.25 * (v0 - v1).powi(2) + c01 * c01).sqrt();
        assert!(vout >= v0 && vout >= v1);
        assert!((vout - top).abs() < 1e-9 * top);
    }

    #[test]
    fn lower_dimension_is_prefix() {
        let x = gaussian_cloud(50, 5, 4);
        let p2 = pca(&x, 2).unwrap();
        let p4 = pca(&x, 4).unwrap();
        for c in 0..2 {
            let s = if (p2.get(0, c) >= 0.0) == (p4.get(0, c) >= 0.0) { 1.0 } else { -1.0 };
            for i in 0..50 {
                assert!((p2.get(i, c) - s * p4.get(i, c)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn out_of_range() {
        let x = gaussian_cloud(3, 5, 0);
        assert!(pca(&x, 4).is_err());
        assert!(pca(&x, 0).is_err());
    }
}
