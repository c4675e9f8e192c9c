//! The Spectral Bridges estimator.
//!
//! A fit runs four stages: k-means++ quantization into `m` Voronoi regions,
//! bridge affinities between the regions, spectral clustering of the region
//! graph into `K` groups, and propagation of region labels to the points.

use serde::{Deserialize, Serialize};

use crate::bridge::{bridge_affinity, AffinityMatrix, DEFAULT_M_FACTOR};
use crate::error::{Error, Result};
use crate::numerics::{DataMatrix, RngState};
use crate::quantize::{self, kmeans, nearest, wcss_curve, KMeansConfig, QuantizationResult};
use crate::spectral::{canonicalize, spectral_cluster};

/// Fraction of the initial WCSS drop under which the curve counts as
/// quasi-linear in [`suggest_m`].
pub const ELBOW_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SBConfig {
    /// Number of final clusters `K`.
    pub n_clusters: usize,
    /// Number of Voronoi regions `m`.
    pub n_regions: usize,
    /// Transform spread factor `M`.
    pub m_factor: f64,
    pub seed: u64,
    pub kmeans_restarts: usize,
    pub lloyd_max_iter: usize,
    pub lloyd_tol: f64,
}

impl SBConfig {
    pub fn new(n_clusters: usize, n_regions: usize) -> Self {
        Self {
            n_clusters,
            n_regions,
            m_factor: DEFAULT_M_FACTOR,
            seed: 42,
            kmeans_restarts: quantize::DEFAULT_RESTARTS,
            lloyd_max_iter: quantize::DEFAULT_MAX_ITER,
            lloyd_tol: quantize::DEFAULT_TOL,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_m_factor(mut self, m_factor: f64) -> Self {
        self.m_factor = m_factor;
        self
    }

    pub fn kmeans_config(&self) -> KMeansConfig {
        KMeansConfig { restarts: self.kmeans_restarts, max_iter: self.lloyd_max_iter, tol: self.lloyd_tol }
    }

    /// Checks `1 <= K <= m <= n` and `M > 1`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.n_clusters == 0 || self.n_clusters > self.n_regions {
            return Err(Error::KFeasibility { k: self.n_clusters, m: self.n_regions });
        }
        if self.n_regions > n {
            return Err(Error::InvalidM { m: self.n_regions, lo: self.n_clusters, hi: n });
        }
        if !self.m_factor.is_finite() || self.m_factor <= 1.0 {
            return Err(Error::InvalidFactor(self.m_factor));
        }
        if self.lloyd_max_iter == 0 || self.kmeans_restarts == 0 {
            return Err(Error::Config("k-means restarts and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// What a fit leaves behind besides the predictive state.
#[derive(Debug, Clone)]
pub struct TrainingState {
    pub assignment: Vec<usize>,
    pub point_labels: Vec<usize>,
    pub affinity: AffinityMatrix,
}

#[derive(Debug, Clone)]
pub struct ClusterModel {
    config: SBConfig,
    centroids: DataMatrix,
    region_labels: Vec<usize>,
    gamma: f64,
    wcss: f64,
    training: Option<TrainingState>,
}

impl ClusterModel {
    pub fn config(&self) -> &SBConfig {
        &self.config
    }

    pub fn centroids(&self) -> &DataMatrix {
        &self.centroids
    }

    pub fn region_labels(&self) -> &[usize] {
        &self.region_labels
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn wcss(&self) -> f64 {
        self.wcss
    }

    /// Labels of the training points; `None` for a model loaded from JSON.
    pub fn point_labels(&self) -> Option<&[usize]> {
        self.training.as_ref().map(|t| t.point_labels.as_slice())
    }

    pub fn training(&self) -> Option<&TrainingState> {
        self.training.as_ref()
    }

    /// Cluster of each new point: the label of its nearest centroid, lowest
    /// centroid index on ties.
    pub fn predict(&self, x_new: &DataMatrix) -> Result<Vec<usize>> {
        let d = self.centroids.cols();
        if x_new.cols() != d {
            return Err(Error::Dimension(format!("model expects {d} columns, got {}", x_new.cols())));
        }
        Ok(x_new.iter_rows().map(|r| self.region_labels[nearest(r, self.centroids.as_slice(), d).0]).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(s)?;
        doc.into_model()
    }
}

pub const MODEL_FORMAT: &str = "spectral-bridges-model";
pub const MODEL_VERSION: u32 = 1;

/// On-disk form of a fitted model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub config: SBConfig,
    pub centroids: Vec<Vec<f64>>,
    pub region_labels: Vec<usize>,
    pub gamma: f64,
    pub m_factor: f64,
    pub wcss: f64,
}

impl From<&ClusterModel> for ModelDocument {
    fn from(m: &ClusterModel) -> Self {
        ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            config: m.config,
            centroids: m.centroids.iter_rows().map(<[f64]>::to_vec).collect(),
            region_labels: m.region_labels.clone(),
            gamma: m.gamma,
            m_factor: m.config.m_factor,
            wcss: m.wcss,
        }
    }
}

impl ModelDocument {
    pub fn into_model(self) -> Result<ClusterModel> {
        if self.format != MODEL_FORMAT || self.version != MODEL_VERSION {
            return Err(Error::Config(format!(
                "unsupported model document {:?} version {}",
                self.format, self.version
            )));
        }
        let centroids = DataMatrix::from_rows(&self.centroids)?;
        if self.region_labels.len() != centroids.rows() {
            return Err(Error::Dimension(format!(
                "{} region labels for {} centroids",
                self.region_labels.len(),
                centroids.rows()
            )));
        }
        let mut config = self.config;
        config.m_factor = self.m_factor;
        Ok(ClusterModel {
            config,
            centroids,
            region_labels: self.region_labels,
            gamma: self.gamma,
            wcss: self.wcss,
            training: None,
        })
    }
}

/// Point labels from region labels: `labels[i] = region_labels[assignment[i]]`.
pub fn propagate(region_labels: &[usize], assignment: &[usize]) -> Result<Vec<usize>> {
    assignment
        .iter()
        .map(|&a| region_labels.get(a).copied().ok_or(Error::Index { index: a, len: region_labels.len() }))
        .collect()
}

/// Quantization stage alone. With `m = K` this is the k-means++ baseline
/// that the full pipeline reduces to.
pub fn quantize_stage(x: &DataMatrix, cfg: &SBConfig) -> Result<QuantizationResult> {
    kmeans(x, cfg.n_regions, &cfg.kmeans_config(), RngState::new(cfg.seed)).map_err(|e| e.in_stage("quantization"))
}

/// k-means++ labels with `K` clusters, drawn from the same random streams a
/// fit with `m = K` would use.
pub fn kmeans_baseline(x: &DataMatrix, cfg: &SBConfig) -> Result<Vec<usize>> {
    let base = SBConfig { n_regions: cfg.n_clusters, ..*cfg };
    base.validate(x.rows())?;
    Ok(canonicalize(quantize_stage(x, &base)?.assignment()))
}

pub fn fit(x: &DataMatrix, cfg: &SBConfig) -> Result<ClusterModel> {
    cfg.validate(x.rows())?;
    let q = quantize_stage(x, cfg)?;
    let affinity = bridge_affinity(x, &q, cfg.m_factor).map_err(|e| e.in_stage("affinity"))?;
    let region_labels = spectral_cluster(&affinity.transformed, cfg.n_clusters, RngState::new(cfg.seed))
        .map_err(|e| e.in_stage("spectral clustering"))?;
    let point_labels = propagate(&region_labels, q.assignment())?;
    Ok(ClusterModel {
        config: *cfg,
        gamma: affinity.gamma(),
        wcss: q.wcss(),
        region_labels,
        training: Some(TrainingState { assignment: q.assignment().to_vec(), point_labels, affinity }),
        centroids: q.centroids().clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MSuggestion {
    pub recommended: usize,
    /// `(m, wcss)` starting with `m = K`, then the candidates ascending.
    pub curve: Vec<(usize, f64)>,
}

/// Elbow heuristic for the number of regions.
///
/// With `w_K` the WCSS at `m = K` and `w_0, w_1, ...` the WCSS at the sorted
/// candidates, the recommendation is the first candidate `c_i` whose forward
/// second difference `(w_i - w_{i+1}) - (w_{i+1} - w_{i+2})` is at most
/// [`ELBOW_THRESHOLD`] times the initial drop `w_K - w_0`. Falls back to the
/// largest candidate when the curve never flattens.
pub fn suggest_m(
    x: &DataMatrix,
    k: usize,
    candidates: &[usize],
    restarts: usize,
    rng: RngState,
) -> Result<MSuggestion> {
    let mut cands = candidates.to_vec();
    cands.sort_unstable();
    cands.dedup();
    let Some(&first) = cands.first() else {
        return Err(Error::Config("no candidate region counts".into()));
    };
    if k == 0 || first <= k {
        return Err(Error::InvalidM { m: first, lo: k + 1, hi: x.rows() });
    }
    let mut ms = vec![k];
    ms.extend(&cands);
    let curve = wcss_curve(x, &ms, restarts, rng)?;
    let w: Vec<f64> = curve[1..].iter().map(|c| c.1).collect();
    let initial_drop = curve[0].1 - w[0];
    let recommended = (0..w.len().saturating_sub(2))
        .find(|&i| (w[i] - w[i + 1]) - (w[i + 1] - w[i + 2]) <= ELBOW_THRESHOLD * initial_drop)
        .map_or(*cands.last().expect("non-empty"), |i| cands[i]);
    Ok(MSuggestion { recommended, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sq_dist;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(centers: &[[f64; 2]], per: usize, sigma: f64, seed: u64) -> (DataMatrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (c, ctr) in centers.iter().enumerate() {
            for _ in 0..per {
                rows.push([ctr[0] + noise.sample(&mut rng), ctr[1] + noise.sample(&mut rng)]);
                y.push(c);
            }
        }
        (DataMatrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn separated_blobs_are_recovered() {
        let (x, y) = blobs(&[[0.0, 0.0], [10.0, 0.0]], 100, 0.5, 1);
        let model = fit(&x, &SBConfig::new(2, 8).with_seed(3)).unwrap();
        assert_eq!(canonicalize(model.point_labels().unwrap()), canonicalize(&y));
    }

    #[test]
    fn m_equals_k_reduces_to_quantization() {
        let (x, _) = blobs(&[[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]], 40, 1.0, 2);
        let cfg = SBConfig::new(3, 3).with_seed(9);
        let model = fit(&x, &cfg).unwrap();
        let base = kmeans_baseline(&x, &cfg).unwrap();
        assert_eq!(canonicalize(model.point_labels().unwrap()), base);
    }

    #[test]
    fn every_point_its_own_cluster() {
        let x = DataMatrix::from_rows(&[[0.0, 0.0], [1.0, 5.0], [4.0, 2.0]]).unwrap();
        let model = fit(&x, &SBConfig::new(3, 3)).unwrap();
        assert_eq!(canonicalize(model.point_labels().unwrap()), vec![0, 1, 2]);
    }

    #[test]
    fn predict_on_training_points() {
        let (x, _) = blobs(&[[0.0, 0.0], [6.0, 6.0]], 50, 1.0, 4);
        let model = fit(&x, &SBConfig::new(2, 6)).unwrap();
        assert_eq!(model.predict(&x).unwrap(), model.point_labels().unwrap());
        let wrong = DataMatrix::from_rows(&[[0.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(model.predict(&wrong), Err(Error::Dimension(_))));
    }

    #[test]
    fn predict_tie_goes_to_lower_centroid() {
        let doc = ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            config: SBConfig::new(2, 2),
            centroids: vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            region_labels: vec![1, 0],
            gamma: 1.0,
            m_factor: 1e4,
            wcss: 0.0,
        };
        let model = doc.into_model().unwrap();
        let x = DataMatrix::from_rows(&[[0.0, 3.0], [50.0, 1.0], [-50.0, 1.0]]).unwrap();
        assert_eq!(model.predict(&x).unwrap(), vec![1, 1, 0]);
    }

    #[test]
    fn predict_matches_brute_force_scan() {
        let (x, _) = blobs(&[[0.0, 0.0], [6.0, 6.0], [-6.0, 6.0]], 60, 1.5, 8);
        let model = fit(&x, &SBConfig::new(3, 12)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let probes: Vec<[f64; 2]> =
            (0..200).map(|_| [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)]).collect();
        let probes = DataMatrix::from_rows(&probes).unwrap();
        let got = model.predict(&probes).unwrap();
        for (i, r) in probes.iter_rows().enumerate() {
            let mut best = 0;
            for k in 1..model.centroids().rows() {
                if sq_dist(r, model.centroids().row(k)) < sq_dist(r, model.centroids().row(best)) {
                    best = k;
                }
            }
            assert_eq!(got[i], model.region_labels()[best]);
        }
    }

    #[test]
    fn propagate_composition() {
        assert_eq!(propagate(&[2, 0, 1], &[0, 1, 2]).unwrap(), vec![2, 0, 1]);
        assert_eq!(propagate(&[4, 0], &[0, 0, 0]).unwrap(), vec![4, 4, 4]);
        assert!(matches!(propagate(&[0, 1], &[0, 2]), Err(Error::Index { index: 2, len: 2 })));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let regions: Vec<usize> = (0..20).map(|_| rng.random_range(0..4)).collect();
        let assign: Vec<usize> = (0..500).map(|_| rng.random_range(0..20)).collect();
        let got = propagate(&regions, &assign).unwrap();
        for i in 0..assign.len() {
            assert_eq!(got[i], regions[assign[i]]);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let (x, _) = blobs(&[[0.0, 0.0], [5.0, 1.0]], 30, 0.7, 6);
        let model = fit(&x, &SBConfig::new(2, 5).with_seed(77)).unwrap();
        let s = model.to_json().unwrap();
        let back = ClusterModel::from_json(&s).unwrap();
        assert_eq!(back.centroids(), model.centroids());
        assert_eq!(back.gamma().to_bits(), model.gamma().to_bits());
        assert_eq!(back.region_labels(), model.region_labels());
        assert_eq!(back.config(), model.config());
        assert_eq!(back.to_json().unwrap(), s);
        assert_eq!(back.predict(&x).unwrap(), model.point_labels().unwrap());
    }

    #[test]
    fn config_errors_carry_kind() {
        let (x, _) = blobs(&[[0.0, 0.0]], 10, 1.0, 0);
        assert!(matches!(fit(&x, &SBConfig::new(3, 2)), Err(Error::KFeasibility { .. })));
        assert!(matches!(fit(&x, &SBConfig::new(2, 11)), Err(Error::InvalidM { .. })));
        assert!(matches!(fit(&x, &SBConfig::new(2, 4).with_m_factor(1.0)), Err(Error::InvalidFactor(_))));
    }

    #[test]
    fn deterministic_fit() {
        let (x, _) = blobs(&[[0.0, 0.0], [4.0, 0.0]], 80, 1.0, 10);
        let cfg = SBConfig::new(2, 10).with_seed(5);
        let a = fit(&x, &cfg).unwrap();
        let b = fit(&x, &cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.point_labels(), b.point_labels());
    }

    fn second_differences(curve: &[(usize, f64)]) -> (f64, Vec<f64>) {
        let w: Vec<f64> = curve[1..].iter().map(|c| c.1).collect();
        let d2 = w.windows(3).map(|t| (t[0] - t[1]) - (t[1] - t[2])).collect();
        (curve[0].1 - w[0], d2)
    }

    #[test]
    fn suggest_compact_blob_takes_smallest() {
        let (x, _) = blobs(&[[0.0, 0.0]], 400, 1.0, 12);
        let s = suggest_m(&x, 1, &[8, 16, 32, 64], 3, RngState::new(1)).unwrap();
        let (drop, d2) = second_differences(&s.curve);
        assert!(d2[0] <= ELBOW_THRESHOLD * drop);
        assert_eq!(s.recommended, 8);
    }

    #[test]
    fn suggest_finds_three_blob_elbow() {
        let (x, _) = blobs(&[[0.0, 0.0], [10.0, 0.0], [5.0, 9.0]], 60, 0.5, 13);
        let s = suggest_m(&x, 1, &[2, 3, 4, 6], 5, RngState::new(2)).unwrap();
        let (drop, d2) = second_differences(&s.curve);
        let expect = [2, 3].into_iter().zip(&d2).find(|(_, &v)| v <= ELBOW_THRESHOLD * drop).map(|(c, _)| c);
        assert_eq!(Some(s.recommended), expect);
        assert_eq!(s.recommended, 3);
        let with_k = suggest_m(&x, 3, &[4, 8, 16, 32], 2, RngState::new(2)).unwrap();
        assert!(with_k.recommended >= 4);
    }

    #[test]
    fn suggest_single_candidate_and_errors() {
        let (x, _) = blobs(&[[0.0, 0.0]], 50, 1.0, 14);
        assert_eq!(suggest_m(&x, 2, &[7], 2, RngState::new(0)).unwrap().recommended, 7);
        assert!(suggest_m(&x, 3, &[3, 5], 2, RngState::new(0)).is_err());
        assert!(suggest_m(&x, 3, &[], 2, RngState::new(0)).is_err());
    }
}
