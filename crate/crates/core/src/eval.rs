//! External clustering metrics and the timing and benchmark experiments built on them.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{self, LabeledDataset};
use crate::error::{Error, Result};
use crate::model::{fit, kmeans_baseline, SBConfig};
use crate::numerics::rng::stage;
use crate::numerics::RngState;

/// Joint counts of two labelings plus their marginals.
struct Contingency {
    n: f64,
    /// `(row, col, count)` for every nonzero cell.
    cells: Vec<(usize, usize, f64)>,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

fn contingency(a: &[usize], b: &[usize]) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let mut ia: HashMap<usize, usize> = HashMap::new();
    let mut ib: HashMap<usize, usize> = HashMap::new();
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        let next = ia.len();
        let r = *ia.entry(x).or_insert(next);
        let next = ib.len();
        let c = *ib.entry(y).or_insert(next);
        *joint.entry((r, c)).or_insert(0) += 1;
    }
    let mut rows = vec![0.0; ia.len()];
    let mut cols = vec![0.0; ib.len()];
    let mut cells = Vec::with_capacity(joint.len());
    let mut keys: Vec<_> = joint.into_iter().collect();
    keys.sort_unstable();
    for ((r, c), v) in keys {
        rows[r] += v as f64;
        cols[c] += v as f64;
        cells.push((r, c, v as f64));
    }
    Ok(Contingency { n: a.len() as f64, cells, rows, cols })
}

#[inline]
fn pairs(v: f64) -> f64 {
    v * (v - 1.0) / 2.0
}

/// Adjusted Rand index, `(index - expected) / (max - expected)` over the
/// contingency table. When the denominator vanishes (both labelings are a
/// single cluster, or both all singletons) the labelings are identical and
/// the result is 1.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = contingency(a, b)?;
    if t.n < 2.0 {
        return Err(Error::Config("ARI needs at least two points".into()));
    }
    let index: f64 = t.cells.iter().map(|&(_, _, v)| pairs(v)).sum();
    let sa: f64 = t.rows.iter().map(|&v| pairs(v)).sum();
    let sb: f64 = t.cols.iter().map(|&v| pairs(v)).sum();
    let expected = sa * sb / pairs(t.n);
    let max = 0.5 * (sa + sb);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(counts: &[f64], n: f64) -> f64 {
    counts.iter().filter(|&&c| c > 0.0).map(|&c| -(c / n) * (c / n).ln()).sum()
}

/// Normalized mutual information with the arithmetic mean of the two
/// entropies as normalizer; 1 when both labelings are a single cluster.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let t = contingency(a, b)?;
    let (ha, hb) = (entropy(&t.rows, t.n), entropy(&t.cols, t.n));
    let denom = 0.5 * (ha + hb);
    if denom == 0.0 {
        return Ok(1.0);
    }
    let mi: f64 = t.cells.iter().map(|&(r, c, v)| (v / t.n) * (v * t.n / (t.rows[r] * t.cols[c])).ln()).sum();
    Ok((mi / denom).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub method: String,
    pub seed: u64,
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub ari: f64,
    pub nmi: f64,
    pub fit_millis: f64,
}

pub const REPORT_CSV_HEADER: &str = "dataset,method,seed,m,K,ari,nmi,fit_millis";

impl EvalReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.dataset, self.method, self.seed, self.m, self.k, self.ari, self.nmi, self.fit_millis
        )
    }
}

pub fn write_reports_csv<W: Write + ?Sized>(w: &mut W, reports: &[EvalReport]) -> std::io::Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn write_reports_jsonl<W: Write + ?Sized>(w: &mut W, reports: &[EvalReport]) -> std::io::Result<()> {
    for r in reports {
        writeln!(w, "{}", serde_json::to_string(r).map_err(std::io::Error::other)?)?;
    }
    Ok(())
}

/// Scores a fit of `cfg` on `ds`. Only the first `score_rows` points count
/// toward the metrics (so appended noise can be excluded).
pub fn evaluate(ds: &LabeledDataset, cfg: &SBConfig, score_rows: Option<usize>) -> Result<EvalReport> {
    let start = Instant::now();
    let model = fit(&ds.x, cfg)?;
    let fit_millis = start.elapsed().as_secs_f64() * 1e3;
    let pred = model.point_labels().expect("fresh fit");
    let keep = score_rows.unwrap_or(pred.len()).min(pred.len());
    Ok(EvalReport {
        dataset: ds.name.clone(),
        method: "spectral-bridges".into(),
        seed: cfg.seed,
        m: cfg.n_regions,
        k: cfg.n_clusters,
        ari: ari(&ds.y[..keep], &pred[..keep])?,
        nmi: nmi(&ds.y[..keep], &pred[..keep])?,
        fit_millis,
    })
}

/// Same as [`evaluate`] for the k-means++ baseline with `K` clusters.
pub fn evaluate_kmeans(ds: &LabeledDataset, cfg: &SBConfig) -> Result<EvalReport> {
    let start = Instant::now();
    let pred = kmeans_baseline(&ds.x, cfg)?;
    let fit_millis = start.elapsed().as_secs_f64() * 1e3;
    Ok(EvalReport {
        dataset: ds.name.clone(),
        method: "kmeans++".into(),
        seed: cfg.seed,
        m: cfg.n_clusters,
        k: cfg.n_clusters,
        ari: ari(&ds.y, &pred)?,
        nmi: nmi(&ds.y, &pred)?,
        fit_millis,
    })
}

/// Least-squares line through `(x, y)` and its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::Config("a line needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("sweep values are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit { slope, intercept, r2 })
}

/// Which parameter a timing sweep varies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sweep {
    /// Dataset sizes at `m = TIMING_FIXED_M`.
    Samples(Vec<usize>),
    /// Region counts at `n = TIMING_FIXED_N`.
    Regions(Vec<usize>),
}

pub const TIMING_K: usize = 5;
pub const TIMING_D: usize = 10;
pub const TIMING_FIXED_M: usize = 10;
pub const TIMING_FIXED_N: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub x: usize,
    pub mean_millis: f64,
    pub std_millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingTable {
    pub variable: &'static str,
    pub rows: Vec<TimingRow>,
    /// `None` for a single-point sweep.
    pub fit: Option<LinearFit>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Wall-clock time of `fit` over a sweep on Gaussian blobs with `K = 5`,
/// `d = 10`. Data generation is outside the timed region; runs are
/// sequential. `restarts` is the k-means restart count inside each fit.
/// One untimed fit at the first sweep point precedes the measurements.
pub fn time_fit(sweep: &Sweep, reps: usize, restarts: usize, seed: u64) -> Result<TimingTable> {
    if reps < 3 {
        return Err(Error::Config(format!("timing needs at least 3 repetitions, got {reps}")));
    }
    let (variable, points): (&'static str, Vec<(usize, usize, usize)>) = match sweep {
        Sweep::Samples(ns) => ("n", ns.iter().map(|&n| (n, n, TIMING_FIXED_M)).collect()),
        Sweep::Regions(ms) => ("m", ms.iter().map(|&m| (m, TIMING_FIXED_N, m)).collect()),
    };
    if points.is_empty() {
        return Err(Error::Config("empty sweep".into()));
    }
    let root = RngState::new(seed);
    let run = |x: usize, n: usize, m: usize, rep: usize| -> Result<f64> {
        let rs = root.child((x as u64) << 16 | rep as u64);
        let ds = data::gaussian_blobs(n, TIMING_K, TIMING_D, &mut rs.stream(stage::DATA))?;
        let mut cfg = SBConfig::new(TIMING_K, m).with_seed(rs.seed());
        cfg.kmeans_restarts = restarts;
        let start = Instant::now();
        fit(&ds.x, &cfg)?;
        Ok(start.elapsed().as_secs_f64() * 1e3)
    };
    // untimed warm-up, then repetitions interleaved across the sweep so
    // slow periods on the host spread over every point
    let (x0, n0, m0) = points[0];
    run(x0, n0, m0, usize::MAX)?;
    let mut times = vec![Vec::with_capacity(reps); points.len()];
    for rep in 0..reps {
        for (slot, &(x, n, m)) in times.iter_mut().zip(&points) {
            slot.push(run(x, n, m, rep)?);
        }
    }
    let rows: Vec<TimingRow> = points
        .iter()
        .zip(&times)
        .map(|(&(x, _, _), t)| {
            let (mean_millis, std_millis) = mean_std(t);
            TimingRow { x, mean_millis, std_millis }
        })
        .collect();
    let fit = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| r.x as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.mean_millis).collect();
        Some(linear_fit(&xs, &ys)?)
    } else {
        None
    };
    Ok(TimingTable { variable, rows, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MSweepRow {
    pub m: usize,
    pub mean_ari: f64,
    pub mean_nmi: f64,
    pub mean_fit_millis: f64,
}

/// Mean ARI/NMI per region count over `reps` seeds (`seed`, `seed + 1`, ...).
pub fn m_sweep(ds: &LabeledDataset, k: usize, m_values: &[usize], reps: usize, seed: u64) -> Result<Vec<MSweepRow>> {
    if reps == 0 {
        return Err(Error::Config("m-sweep needs at least one repetition".into()));
    }
    let mut out = Vec::with_capacity(m_values.len());
    for &m in m_values {
        if m < k || m > ds.x.rows() {
            return Err(Error::InvalidM { m, lo: k, hi: ds.x.rows() });
        }
        let (mut sa, mut sn, mut st) = (0.0, 0.0, 0.0);
        for rep in 0..reps {
            let cfg = SBConfig::new(k, m).with_seed(seed + rep as u64);
            let r = evaluate(ds, &cfg, None)?;
            sa += r.ari;
            sn += r.nmi;
            st += r.fit_millis;
        }
        let r = reps as f64;
        out.push(MSweepRow { m, mean_ari: sa / r, mean_nmi: sn / r, mean_fit_millis: st / r });
    }
    Ok(out)
}

pub const NOISE_UNIFORM_COUNT: usize = 250;
pub const NOISE_GAUSSIAN_SIGMA: f64 = 0.1;

/// Impossible dataset clean, with 250 uniform points added, and with
/// Gaussian jitter of 0.1; each scored on the original points only.
pub fn noise_experiment(k: usize, m: usize, seed: u64) -> Result<Vec<EvalReport>> {
    let rng = RngState::new(seed);
    let clean = data::impossible(data::IMPOSSIBLE_N, &mut rng.stream(stage::DATA))?;
    let n = clean.x.rows();
    let uniform = data::add_uniform_noise(&clean, NOISE_UNIFORM_COUNT, &mut rng.stream(stage::NOISE))?;
    let gaussian =
        data::add_gaussian_noise(&clean, NOISE_GAUSSIAN_SIGMA, &mut rng.fork(stage::NOISE).stream(stage::NOISE))?;
    let cfg = SBConfig::new(k, m).with_seed(seed);
    let mut reports = Vec::with_capacity(3);
    for (condition, ds) in [("clean", &clean), ("uniform", &uniform), ("gaussian", &gaussian)] {
        let mut r = evaluate(ds, &cfg, Some(n))?;
        r.dataset = format!("impossible/{condition}");
        reports.push(r);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ari_basics() {
        let a = [0, 0, 1, 1, 2, 2];
        assert_eq!(ari(&a, &a).unwrap(), 1.0);
        assert_eq!(ari(&a, &[1, 1, 0, 0, 2, 2]).unwrap(), 1.0);
        assert_eq!(ari(&[0; 6], &[0, 1, 2, 3, 4, 5]).unwrap(), 0.0);
        assert!(matches!(ari(&[0, 1], &[0]), Err(Error::LengthMismatch(2, 1))));
    }

    #[test]
    fn nmi_basics() {
        let a = [0, 0, 1, 1, 2, 2];
        assert!((nmi(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        // halves vs parity: uniform contingency table
        let halves: Vec<usize> = (0..16).map(|i| i / 8).collect();
        let parity: Vec<usize> = (0..16).map(|i| i % 2).collect();
        assert!(nmi(&halves, &parity).unwrap().abs() < 1e-12);
        assert_eq!(nmi(&a, &[0; 6]).unwrap(), 0.0);
        assert_eq!(nmi(&[3; 4], &[1; 4]).unwrap(), 1.0);
    }

    #[test]
    fn linear_fit_exact_line() {
        let f = linear_fit(&[1.0, 2.0, 3.0, 4.0], &[3.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_timing() {
        let t = time_fit(&Sweep::Samples(vec![200]), 3, 1, 0).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].std_millis >= 0.0 && t.rows[0].mean_millis > 0.0);
        assert!(t.fit.is_none());
        assert!(time_fit(&Sweep::Samples(vec![200]), 2, 1, 0).is_err());
    }

    #[test]
    fn report_csv_columns() {
        let r = EvalReport {
            dataset: "moons".into(),
            method: "spectral-bridges".into(),
            seed: 1,
            m: 12,
            k: 2,
            ari: 0.5,
            nmi: 0.25,
            fit_millis: 3.0,
        };
        let mut buf = Vec::new();
        write_reports_csv(&mut buf, std::slice::from_ref(&r)).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "dataset,method,seed,m,K,ari,nmi,fit_millis\nmoons,spectral-bridges,1,12,2,0.5,0.25,3\n"
        );
        let mut buf = Vec::new();
        write_reports_jsonl(&mut buf, std::slice::from_ref(&r)).unwrap();
        let back: EvalReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #[test]
        fn metrics_symmetric_and_bounded(a in prop::collection::vec(0usize..4, 2..40), seed in 0usize..1000) {
            let b: Vec<usize> = a.iter().enumerate().map(|(i, &x)| (x * 7 + i * seed) % 3).collect();
            let (x, y) = (ari(&a, &b).unwrap(), ari(&b, &a).unwrap());
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!((-0.5 - 1e-12..=1.0 + 1e-12).contains(&x));
            let (u, v) = (nmi(&a, &b).unwrap(), nmi(&b, &a).unwrap());
            prop_assert!((u - v).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&u));
        }
    }
}
