//! Bridge affinity between Voronoi regions.
//!
//! For two regions `k` and `l` every member point is projected onto the
//! segment `[mu_k, mu_l]`. Its clamped relative position `t` is folded
//! around the midpoint into a margin coordinate `alpha = min(t, 1 - t)`,
//! and the raw affinity is the mean of `alpha^2` over both regions:
//!
//! ```text
//! a_kl = sum_{x in V_k u V_l} alpha(x)^2 / (n_k + n_l),   a_kk = 0
//! ```
//!
//! Equivalently, `a_kl` is the drop in inertia when the two regions are
//! summarized by the segment instead of the two centroids, normalized by
//! `(n_k + n_l) * |mu_k - mu_l|^2`. [`bridge_inertia_gap`] computes that
//! drop from the two inertias directly and serves as a reference.
//!
//! The raw matrix is then spread by `exp(gamma * sqrt(a_kl))` with `gamma`
//! chosen so that the 90th percentile entry is `M` times the 10th.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, quantiles, sq_dist, DataMatrix, SymMatrix};
use crate::quantize::QuantizationResult;

/// Default spread factor between the 90th and 10th percentile affinities.
pub const DEFAULT_M_FACTOR: f64 = 1e4;

/// Below this quantile spread the transform degenerates to a constant.
const MIN_SPREAD: f64 = 1e-12;

/// Largest exponent allowed in the transform before a global rescale.
const MAX_EXPONENT: f64 = 600.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCoeffs {
    pub t: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[inline]
fn fold(t: f64) -> f64 {
    if t <= 0.5 {
        t
    } else {
        1.0 - t
    }
}

/// Clamped segment positions `t` and margin coordinates `alpha` of each
/// point with respect to the segment from `mu_k` to `mu_l`.
pub fn projection_coeffs<'a>(
    points: impl IntoIterator<Item = &'a [f64]>,
    mu_k: &[f64],
    mu_l: &[f64],
) -> Result<ProjectionCoeffs> {
    let seg: Vec<f64> = mu_l.iter().zip(mu_k).map(|(b, a)| b - a).collect();
    let len2 = dot(&seg, &seg);
    if len2 == 0.0 {
        return Err(Error::CoincidentCentroids { k: 0, l: 1 });
    }
    let mut t = Vec::new();
    let mut alpha = Vec::new();
    for x in points {
        let rel: f64 = x.iter().zip(mu_k).zip(&seg).map(|((xi, mk), s)| (xi - mk) * s).sum();
        let ti = (rel / len2).clamp(0.0, 1.0);
        t.push(ti);
        alpha.push(fold(ti));
    }
    Ok(ProjectionCoeffs { t, alpha })
}

fn check_distinct(centroids: &DataMatrix) -> Result<()> {
    let m = centroids.rows();
    for k in 0..m {
        for l in k + 1..m {
            if sq_dist(centroids.row(k), centroids.row(l)) == 0.0 {
                return Err(Error::CoincidentCentroids { k, l });
            }
        }
    }
    Ok(())
}

fn check_consistent(x: &DataMatrix, q: &QuantizationResult) -> Result<()> {
    if q.assignment().len() != x.rows() || q.centroids().cols() != x.cols() {
        return Err(Error::Dimension("quantization does not match the data".into()));
    }
    Ok(())
}

/// Raw bridge affinities for all region pairs.
///
/// Each region's points are centered on its centroid once; one pass over
/// the block against all `m` segments leaving that centroid accumulates the
/// region's half of every `a_kl` (a matrix product per region rather than
/// a separate scan per pair). Rows are computed in parallel, each in fixed
/// point order, so the result does not depend on scheduling.
pub fn raw_affinity(x: &DataMatrix, q: &QuantizationResult) -> Result<SymMatrix> {
    check_consistent(x, q)?;
    let c = q.centroids();
    check_distinct(c)?;
    let m = c.rows();
    let d = x.cols();

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, &a) in q.assignment().iter().enumerate() {
        members[a].push(i);
    }

    // half[k][l]: sum of alpha^2 over V_k for the segment k -> l
    let half: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|k| {
            let mu_k = c.row(k);
            let mut seg = vec![0.0; m * d];
            let mut inv_len2 = vec![0.0; m];
            for l in 0..m {
                if l == k {
                    continue;
                }
                let s = &mut seg[l * d..(l + 1) * d];
                for ((s, b), a) in s.iter_mut().zip(c.row(l)).zip(mu_k) {
                    *s = b - a;
                }
                inv_len2[l] = 1.0 / dot(s, s);
            }
            let mut acc = vec![0.0; m];
            let mut centered = vec![0.0; d];
            for &i in &members[k] {
                for ((z, xi), mk) in centered.iter_mut().zip(x.row(i)).zip(mu_k) {
                    *z = xi - mk;
                }
                for l in 0..m {
                    if l == k {
                        continue;
                    }
                    let t = (dot(&centered, &seg[l * d..(l + 1) * d]) * inv_len2[l]).clamp(0.0, 1.0);
                    let a = fold(t);
                    acc[l] += a * a;
                }
            }
            acc
        })
        .collect();

    let counts = q.counts();
    let mut out = SymMatrix::zeros(m);
    for k in 0..m {
        for l in 0..k {
            let n = (counts[k] + counts[l]) as f64;
            out.set(k, l, (half[k][l] + half[l][k]) / n);
        }
    }
    Ok(out)
}

/// Straightforward per-pair evaluation of [`raw_affinity`]: for every pair
/// `k < l`, scan the whole sample for members of either region.
pub fn raw_affinity_naive(x: &DataMatrix, q: &QuantizationResult) -> Result<SymMatrix> {
    check_consistent(x, q)?;
    let c = q.centroids();
    check_distinct(c)?;
    let m = c.rows();
    let assign = q.assignment();
    let mut out = SymMatrix::zeros(m);
    for k in 0..m {
        for l in k + 1..m {
            let pts = (0..x.rows()).filter(|&i| assign[i] == k || assign[i] == l).map(|i| x.row(i));
            let coeffs = projection_coeffs(pts, c.row(k), c.row(l))?;
            let sum: f64 = coeffs.alpha.iter().map(|a| a * a).sum();
            out.set(k, l, sum / coeffs.alpha.len() as f64);
        }
    }
    Ok(out)
}

/// `|I_kl - B_kl| / ((n_k + n_l) |mu_k - mu_l|^2)` where `I_kl` is the
/// inertia of the two regions about their own centroids and `B_kl` the
/// inertia about the clamped projections onto the segment between them.
pub fn bridge_inertia_gap(x: &DataMatrix, q: &QuantizationResult, k: usize, l: usize) -> Result<f64> {
    check_consistent(x, q)?;
    let c = q.centroids();
    let m = c.rows();
    for idx in [k, l] {
        if idx >= m {
            return Err(Error::Index { index: idx, len: m });
        }
    }
    if k == l {
        return Ok(0.0);
    }
    let (mu_k, mu_l) = (c.row(k), c.row(l));
    let len2 = sq_dist(mu_k, mu_l);
    if len2 == 0.0 {
        return Err(Error::CoincidentCentroids { k, l });
    }
    let mut balls = 0.0;
    let mut bridge = 0.0;
    let mut n = 0usize;
    let mut proj = vec![0.0; x.cols()];
    for (i, &a) in q.assignment().iter().enumerate() {
        if a != k && a != l {
            continue;
        }
        n += 1;
        let xi = x.row(i);
        balls += sq_dist(xi, if a == k { mu_k } else { mu_l });
        let rel: f64 = (0..xi.len()).map(|j| (xi[j] - mu_k[j]) * (mu_l[j] - mu_k[j])).sum();
        let t = (rel / len2).clamp(0.0, 1.0);
        for j in 0..proj.len() {
            proj[j] = mu_k[j] + t * (mu_l[j] - mu_k[j]);
        }
        bridge += sq_dist(xi, &proj);
    }
    Ok((balls - bridge).abs() / (n as f64 * len2))
}

/// Scale and offset of the exponential spread `exp(gamma * (sqrt(a) - offset))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityTransform {
    pub gamma: f64,
    pub offset: f64,
    /// Quantile spread was below `1e-12`; `gamma` was set to 0.
    pub degenerate: bool,
}

impl AffinityTransform {
    #[inline]
    pub fn apply(&self, raw: f64) -> f64 {
        (self.gamma * (raw.sqrt() - self.offset)).exp()
    }
}

/// Applies the exponential spread to a raw affinity matrix.
///
/// `s = sqrt(a)` is shifted by half its maximum, `q10` and `q90` are taken
/// over all `m^2` shifted entries (diagonal included) and
/// `gamma = ln(M) / (q90 - q10)`. The diagonal of the output is zero.
pub fn transform_affinity(raw: &SymMatrix, m_factor: f64) -> Result<(SymMatrix, AffinityTransform)> {
    transform_with_shift(raw, m_factor, true)
}

pub(crate) fn transform_with_shift(
    raw: &SymMatrix,
    m_factor: f64,
    shift: bool,
) -> Result<(SymMatrix, AffinityTransform)> {
    if !m_factor.is_finite() || m_factor <= 1.0 {
        return Err(Error::InvalidFactor(m_factor));
    }
    let m = raw.order();
    if m == 0 {
        return Err(Error::EmptyInput);
    }
    let roots: Vec<f64> = raw.to_dense().into_iter().map(f64::sqrt).collect();
    let max = roots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut offset = if shift { 0.5 * max } else { 0.0 };
    let shifted: Vec<f64> = roots.iter().map(|s| s - offset).collect();
    let q = quantiles(&shifted, &[0.1, 0.9])?;
    let spread = q[1] - q[0];
    let (gamma, degenerate) = if spread < MIN_SPREAD { (0.0, true) } else { (m_factor.ln() / spread, false) };

    // A global rescale of the affinity leaves the normalized Laplacian
    // unchanged; only move the offset when exp would overflow.
    let top = gamma * (max - offset);
    if top > MAX_EXPONENT {
        offset += (top - MAX_EXPONENT) / gamma;
    }
    let tf = AffinityTransform { gamma, offset, degenerate };
    let mut out = raw.map(|a| tf.apply(a));
    for i in 0..m {
        out.set(i, i, 0.0);
    }
    Ok((out, tf))
}

/// Raw and transformed bridge affinities of a quantization.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    pub raw: SymMatrix,
    pub transformed: SymMatrix,
    pub transform: AffinityTransform,
    pub m_factor: f64,
}

impl AffinityMatrix {
    pub fn order(&self) -> usize {
        self.raw.order()
    }

    pub fn gamma(&self) -> f64 {
        self.transform.gamma
    }
}

pub fn bridge_affinity(x: &DataMatrix, q: &QuantizationResult, m_factor: f64) -> Result<AffinityMatrix> {
    if !m_factor.is_finite() || m_factor <= 1.0 {
        return Err(Error::InvalidFactor(m_factor));
    }
    let raw = raw_affinity(x, q)?;
    let (transformed, transform) = transform_affinity(&raw, m_factor)?;
    Ok(AffinityMatrix { raw, transformed, transform, m_factor })
}
