//! Vector quantization: k-means++ seeding followed by Lloyd iterations.
//!
//! The result partitions the sample into Voronoi regions, one per centroid.
//! Ties in distance always go to the lowest centroid index, and every region
//! is non-empty on return (empty ones are relocated onto the point farthest
//! from its own centroid).

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::rng::stage;
use crate::numerics::{sq_dist, DataMatrix, RngState};

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationResult {
    centroids: DataMatrix,
    assignment: Vec<usize>,
    counts: Vec<usize>,
    wcss: f64,
}

impl QuantizationResult {
    pub fn centroids(&self) -> &DataMatrix {
        &self.centroids
    }

    /// Region index of every point.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Within-cluster sum of squares.
    pub fn wcss(&self) -> f64 {
        self.wcss
    }

    pub fn n_regions(&self) -> usize {
        self.centroids.rows()
    }

    /// Builds a result from an externally supplied partition. The caller
    /// vouches that `assignment` indexes rows of `centroids`.
    pub fn from_parts(x: &DataMatrix, centroids: DataMatrix, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != x.rows() {
            return Err(Error::Dimension(format!(
                "assignment has {} entries for {} points",
                assignment.len(),
                x.rows()
            )));
        }
        if centroids.cols() != x.cols() {
            return Err(Error::Dimension("centroid and data widths differ".into()));
        }
        let m = centroids.rows();
        let mut counts = vec![0; m];
        let mut wcss = 0.0;
        for (i, &a) in assignment.iter().enumerate() {
            if a >= m {
                return Err(Error::Index { index: a, len: m });
            }
            counts[a] += 1;
            wcss += sq_dist(x.row(i), centroids.row(a));
        }
        Ok(Self { centroids, assignment, counts, wcss })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, max_iter: DEFAULT_MAX_ITER, tol: DEFAULT_TOL }
    }
}

fn check_m(m: usize, n: usize) -> Result<()> {
    if m < 1 || m > n {
        return Err(Error::InvalidM { m, lo: 1, hi: n });
    }
    Ok(())
}

/// k-means++ seeding: the first centroid is a uniformly drawn point, each
/// further one is drawn with probability proportional to its squared
/// distance to the nearest centroid chosen so far.
///
/// If every remaining weight is zero (duplicated points), the next centroid
/// is drawn uniformly among points not yet chosen.
pub fn kmeans_plus_plus_seed<R: Rng + ?Sized>(x: &DataMatrix, m: usize, rng: &mut R) -> Result<DataMatrix> {
    let n = x.rows();
    check_m(m, n)?;
    let mut chosen = vec![false; n];
    let mut picks = Vec::with_capacity(m);

    let first = rng.random_range(0..n);
    chosen[first] = true;
    picks.push(first);
    let mut d2: Vec<f64> = x.iter_rows().map(|r| sq_dist(r, x.row(first))).collect();
    d2[first] = 0.0;

    while picks.len() < m {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            let mut last_positive = 0;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    last_positive = i;
                    acc += w;
                    if acc > target {
                        pick = Some(i);
                        break;
                    }
                }
            }
            pick.unwrap_or(last_positive)
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[next] = true;
        picks.push(next);
        let c = x.row(next);
        for (i, w) in d2.iter_mut().enumerate() {
            let d = sq_dist(x.row(i), c);
            if d < *w {
                *w = d;
            }
        }
        d2[next] = 0.0;
    }
    x.select_rows(&picks)
}

/// Index and squared distance of the nearest centroid, lowest index on ties.
#[inline]
pub(crate) fn nearest(point: &[f64], centroids: &[f64], d: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centroids.chunks_exact(d).enumerate() {
        let dist = sq_dist(point, c);
        if dist < best.1 {
            best = (k, dist);
        }
    }
    best
}

fn assign_all(x: &DataMatrix, centroids: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let d = x.cols();
    x.as_slice().par_chunks_exact(d).map(|r| nearest(r, centroids, d)).unzip()
}

fn counts_of(assign: &[usize], m: usize) -> Vec<usize> {
    let mut c = vec![0; m];
    for &a in assign {
        c[a] += 1;
    }
    c
}

/// Farthest point (from its own centroid) that can be removed from its
/// region without emptying it.
fn farthest_movable(d2: &[f64], assign: &[usize], counts: &[usize], taken: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in 0..d2.len() {
        if taken[i] || counts[assign[i]] <= 1 {
            continue;
        }
        if best.is_none_or(|b| d2[i] > d2[b]) {
            best = Some(i);
        }
    }
    best
}

fn repair_empty(x: &DataMatrix, centroids: &mut [f64], assign: &mut Vec<usize>, d2: &mut Vec<f64>, m: usize) {
    let d = x.cols();
    for _ in 0..3 {
        let mut counts = counts_of(assign, m);
        if counts.iter().all(|&c| c > 0) {
            return;
        }
        let mut taken = vec![false; x.rows()];
        for k in 0..m {
            if counts[k] > 0 {
                continue;
            }
            let Some(i) = farthest_movable(d2, assign, &counts, &taken) else { return };
            taken[i] = true;
            counts[assign[i]] -= 1;
            counts[k] += 1;
            centroids[k * d..(k + 1) * d].copy_from_slice(x.row(i));
        }
        (*assign, *d2) = assign_all(x, centroids);
    }
    // Duplicated points can keep a relocated centroid shadowed by a
    // lower-index twin; hand it the point directly.
    let mut counts = counts_of(assign, m);
    let mut taken = vec![false; x.rows()];
    for k in 0..m {
        if counts[k] > 0 {
            continue;
        }
        let Some(i) = farthest_movable(d2, assign, &counts, &taken) else { return };
        taken[i] = true;
        counts[assign[i]] -= 1;
        counts[k] += 1;
        centroids[k * d..(k + 1) * d].copy_from_slice(x.row(i));
        assign[i] = k;
        d2[i] = 0.0;
    }
}

fn region_means(x: &DataMatrix, assign: &[usize], previous: &[f64], m: usize) -> Vec<f64> {
    let d = x.cols();
    let mut sums = vec![0.0; m * d];
    let mut counts = vec![0usize; m];
    for (r, &a) in x.iter_rows().zip(assign) {
        counts[a] += 1;
        for (s, v) in sums[a * d..(a + 1) * d].iter_mut().zip(r) {
            *s += v;
        }
    }
    for k in 0..m {
        if counts[k] == 0 {
            sums[k * d..(k + 1) * d].copy_from_slice(&previous[k * d..(k + 1) * d]);
        } else {
            let c = counts[k] as f64;
            sums[k * d..(k + 1) * d].iter_mut().for_each(|s| *s /= c);
        }
    }
    sums
}

/// Lloyd iterations from the given centroids.
///
/// Stops when no centroid moves by more than `tol` or after `max_iter`
/// updates. The returned assignment is the nearest-centroid partition for
/// the returned centroids, and the WCSS never increases between iterations:
/// an update that would raise it (rounding at convergence) is discarded.
pub fn lloyd(x: &DataMatrix, centroids: &DataMatrix, max_iter: usize, tol: f64) -> Result<QuantizationResult> {
    let m = centroids.rows();
    let d = x.cols();
    check_m(m, x.rows())?;
    if centroids.cols() != d {
        return Err(Error::Dimension(format!("centroids have {} columns, data has {d}", centroids.cols())));
    }
    if max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    let mut cent = centroids.as_slice().to_vec();
    let (mut assign, mut d2) = assign_all(x, &cent);
    repair_empty(x, &mut cent, &mut assign, &mut d2, m);
    let mut wcss: f64 = d2.iter().sum();

    for _ in 0..max_iter {
        let next = region_means(x, &assign, &cent, m);
        let shift =
            cent.chunks_exact(d).zip(next.chunks_exact(d)).map(|(a, b)| sq_dist(a, b)).fold(0.0f64, f64::max).sqrt();
        let mut next = next;
        let (mut na, mut nd) = assign_all(x, &next);
        repair_empty(x, &mut next, &mut na, &mut nd, m);
        let nw: f64 = nd.iter().sum();
        if nw > wcss {
            break;
        }
        cent = next;
        assign = na;
        wcss = nw;
        if shift <= tol {
            break;
        }
    }
    let counts = counts_of(&assign, m);
    Ok(QuantizationResult { centroids: DataMatrix::new(m, d, cent)?, assignment: assign, counts, wcss })
}

/// Best-of-restarts k-means. Restart `r` seeds from `rng.child(r)`; the
/// lowest WCSS wins, earliest restart on ties.
pub fn kmeans(x: &DataMatrix, m: usize, cfg: &KMeansConfig, rng: RngState) -> Result<QuantizationResult> {
    check_m(m, x.rows())?;
    let mut best: Option<QuantizationResult> = None;
    for r in 0..cfg.restarts.max(1) {
        let mut stream = rng.child(r as u64).stream(stage::QUANTIZE);
        let seeds = kmeans_plus_plus_seed(x, m, &mut stream)?;
        let q = lloyd(x, &seeds, cfg.max_iter, cfg.tol)?;
        if best.as_ref().is_none_or(|b| q.wcss < b.wcss) {
            best = Some(q);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Adds `extra` centroids greedily at the points farthest from the current
/// set (lowest index on ties).
fn extend_farthest(x: &DataMatrix, base: &DataMatrix, extra: usize) -> Result<DataMatrix> {
    let d = x.cols();
    let mut cent = base.as_slice().to_vec();
    let mut d2: Vec<f64> = x.iter_rows().map(|r| nearest(r, &cent, d).1).collect();
    for _ in 0..extra {
        let mut far = 0;
        for i in 1..d2.len() {
            if d2[i] > d2[far] {
                far = i;
            }
        }
        let c = x.row(far).to_vec();
        for (i, w) in d2.iter_mut().enumerate() {
            *w = w.min(sq_dist(x.row(i), &c));
        }
        cent.extend_from_slice(&c);
    }
    DataMatrix::new(base.rows() + extra, d, cent)
}

/// Best-of-restarts WCSS for each requested region count.
///
/// Counts are solved in ascending order and each one also tries the previous
/// count's best solution extended with farthest-point centroids, which keeps
/// the curve non-increasing in `m`. Output follows the input order.
pub fn wcss_curve(x: &DataMatrix, m_values: &[usize], restarts: usize, rng: RngState) -> Result<Vec<(usize, f64)>> {
    for &m in m_values {
        check_m(m, x.rows())?;
    }
    let mut sorted: Vec<usize> = m_values.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let cfg = KMeansConfig { restarts, ..KMeansConfig::default() };

    let mut solved: Vec<(usize, f64)> = Vec::with_capacity(sorted.len());
    let mut prev: Option<QuantizationResult> = None;
    for &m in &sorted {
        let mut best = kmeans(x, m, &cfg, rng.child(m as u64))?;
        if let Some(p) = &prev {
            let warm = extend_farthest(x, p.centroids(), m - p.n_regions())?;
            let q = lloyd(x, &warm, cfg.max_iter, cfg.tol)?;
            if q.wcss <= best.wcss {
                best = q;
            }
        }
        solved.push((m, best.wcss));
        prev = Some(best);
    }
    Ok(m_values.iter().map(|m| *solved.iter().find(|(s, _)| s == m).expect("solved every m")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(rows: &[[f64; 2]]) -> DataMatrix {
        DataMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn seed_saturates_at_m_equals_n() {
        let x = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0], [5.0, 5.0], [2.0, 2.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = kmeans_plus_plus_seed(&x, 5, &mut rng).unwrap();
        let mut rows: Vec<Vec<f64>> = c.iter_rows().map(<[f64]>::to_vec).collect();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want: Vec<Vec<f64>> = x.iter_rows().map(<[f64]>::to_vec).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rows, want);
    }

    #[test]
    fn seed_single_is_a_data_point() {
        let x = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = kmeans_plus_plus_seed(&x, 1, &mut rng).unwrap();
        assert!(x.iter_rows().any(|r| r == c.row(0)));
        assert!(matches!(kmeans_plus_plus_seed(&x, 4, &mut rng), Err(Error::InvalidM { .. })));
        assert!(matches!(kmeans_plus_plus_seed(&x, 0, &mut rng), Err(Error::InvalidM { .. })));
    }

    #[test]
    fn seed_second_centroid_crosses_to_far_pair() {
        // pairs of points 1 apart, 200 apart from each other
        let x = pts(&[[0.0, 0.0], [1.0, 0.0], [200.0, 0.0], [201.0, 0.0]]);
        // exact D^2 law: from point 0, P(far pair) = (200^2 + 201^2) / (1 + 200^2 + 201^2)
        let p_far_exact = {
            let w = [0.0f64, 1.0, 40000.0, 40401.0];
            (w[2] + w[3]) / w.iter().sum::<f64>()
        };
        assert!(p_far_exact >= 0.99);
        let trials = 2000;
        let mut far = 0;
        for s in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let c = kmeans_plus_plus_seed(&x, 2, &mut rng).unwrap();
            if (c.get(0, 0) < 100.0) != (c.get(1, 0) < 100.0) {
                far += 1;
            }
        }
        assert!(far as f64 / trials as f64 >= 0.99);
    }

    #[test]
    fn lloyd_identity_at_m_equals_n() {
        let x = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0], [5.0, 5.0]]);
        let q = lloyd(&x, &x, 10, 1e-6).unwrap();
        assert_eq!(q.wcss(), 0.0);
        assert_eq!(q.assignment(), &[0, 1, 2, 3]);
        assert_eq!(q.counts(), &[1, 1, 1, 1]);
    }

    #[test]
    fn lloyd_recovers_blob_means() {
        let x = pts(&[[0.0, 0.0], [0.0, 1.0], [10.0, 10.0], [12.0, 10.0]]);
        let init = pts(&[[0.0, 0.0], [10.0, 10.0]]);
        let q = lloyd(&x, &init, 50, 1e-9).unwrap();
        assert_eq!(q.centroids().row(0), &[0.0, 0.5]);
        assert_eq!(q.centroids().row(1), &[11.0, 10.0]);
        assert_eq!(q.wcss(), 0.5 + 2.0);
    }

    #[test]
    fn lloyd_fixed_point() {
        let x = pts(&[[0.0, 0.0], [0.0, 1.0], [10.0, 10.0], [12.0, 10.0], [11.0, 9.0]]);
        let q = kmeans(&x, 2, &KMeansConfig::default(), RngState::new(5)).unwrap();
        let again = lloyd(&x, q.centroids(), 1, 1e-6).unwrap();
        assert_eq!(again, q);
    }

    #[test]
    fn empty_region_is_repaired() {
        // second centroid is far from everything and starts empty
        let x = pts(&[[0.0, 0.0], [0.1, 0.0], [5.0, 0.0], [5.1, 0.0]]);
        let init = pts(&[[2.5, 0.0], [1000.0, 1000.0]]);
        let q = lloyd(&x, &init, 100, 1e-9).unwrap();
        assert!(q.counts().iter().all(|&c| c >= 1));
        assert_eq!(q.counts().iter().sum::<usize>(), 4);
    }

    #[test]
    fn duplicate_points_still_fill_regions() {
        let x = pts(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [2.0, 2.0]]);
        let q = kmeans(&x, 3, &KMeansConfig::default(), RngState::new(1)).unwrap();
        assert!(q.counts().iter().all(|&c| c >= 1));
    }

    fn exact_min_wcss(x: &DataMatrix, m: usize) -> f64 {
        // every assignment of points to m labels
        let n = x.rows();
        let mut best = f64::INFINITY;
        let mut labels = vec![0usize; n];
        loop {
            let mut w = 0.0;
            for k in 0..m {
                let members: Vec<usize> = (0..n).filter(|&i| labels[i] == k).collect();
                if members.is_empty() {
                    continue;
                }
                let sub = x.select_rows(&members).unwrap();
                let mu = sub.column_means();
                w += sub.iter_rows().map(|r| sq_dist(r, &mu)).sum::<f64>();
            }
            best = best.min(w);
            let mut i = 0;
            loop {
                if i == n {
                    return best;
                }
                labels[i] += 1;
                if labels[i] < m {
                    break;
                }
                labels[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn wcss_curve_elbow_on_three_blobs() {
        let x = pts(&[
            [0.0, 0.0],
            [0.3, 0.1],
            [0.1, 0.4],
            [5.0, 5.0],
            [5.2, 4.8],
            [4.9, 5.3],
            [10.0, 0.0],
            [10.3, 0.2],
            [9.8, -0.2],
        ]);
        let curve = wcss_curve(&x, &[1, 2, 3, 4], 10, RngState::new(2)).unwrap();
        let exact: Vec<f64> = (1..=4).map(|m| exact_min_wcss(&x, m)).collect();
        for ((m, w), e) in curve.iter().zip(&exact) {
            assert!((w - e).abs() < 1e-9, "m={m}: {w} vs exact {e}");
        }
        let drop_23 = curve[1].1 - curve[2].1;
        let drop_34 = curve[2].1 - curve[3].1;
        assert!(drop_23 > 10.0 * drop_34);
    }

    #[test]
    fn wcss_curve_endpoints() {
        let x = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0], [5.0, 5.0]]);
        let curve = wcss_curve(&x, &[4, 1], 3, RngState::new(0)).unwrap();
        assert_eq!(curve[0], (4, 0.0));
        let mu = x.column_means();
        let total: f64 = x.iter_rows().map(|r| sq_dist(r, &mu)).sum();
        assert!((curve[1].1 - total).abs() < 1e-12);
        assert!(wcss_curve(&x, &[5], 3, RngState::new(0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn lloyd_partition_invariants(
            raw in prop::collection::vec(-10.0f64..10.0, 16..80),
            m in 1usize..6,
            seed in 0u64..1000,
        ) {
            let n = raw.len() / 2;
            let x = DataMatrix::new(n, 2, raw[..n * 2].to_vec()).unwrap();
            let q = kmeans(&x, m, &KMeansConfig { restarts: 2, ..Default::default() }, RngState::new(seed)).unwrap();
            prop_assert_eq!(q.counts().iter().sum::<usize>(), n);
            prop_assert!(q.counts().iter().all(|&c| c >= 1));
            let mut w = 0.0;
            for (i, r) in x.iter_rows().enumerate() {
                let (k, d) = nearest(r, q.centroids().as_slice(), 2);
                prop_assert_eq!(k, q.assignment()[i]);
                w += d;
            }
            prop_assert!((w - q.wcss()).abs() <= 1e-9 * w.max(1.0));
            let again = kmeans(&x, m, &KMeansConfig { restarts: 2, ..Default::default() }, RngState::new(seed)).unwrap();
            prop_assert_eq!(again, q);
        }

        #[test]
        fn curve_is_non_increasing(raw in prop::collection::vec(-10.0f64..10.0, 40..80), seed in 0u64..100) {
            let n = raw.len() / 2;
            let x = DataMatrix::new(n, 2, raw[..n * 2].to_vec()).unwrap();
            let ms = [1, 2, 3, 5, 8];
            let curve = wcss_curve(&x, &ms, 2, RngState::new(seed)).unwrap();
            for w in curve.windows(2) {
                prop_assert!(w[1].1 <= w[0].1);
            }
        }
    }
}
