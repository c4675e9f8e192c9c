//! Synthetic benchmark datasets with noise injection, plus CSV I/O.
//!
//! Generators are deterministic functions of their arguments and the
//! generator passed in. Moons and Circles split evenly between two classes,
//! Smile into four equal parts and Impossible into seven classes of
//! 24.8/18.8/11.3/7.5/12.5/12.5/12.5 %.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: DataMatrix,
    pub y: Vec<usize>,
    pub name: String,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, x: DataMatrix, y: Vec<usize>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::LengthMismatch(x.rows(), y.len()));
        }
        Ok(Self { x, y, name: name.into() })
    }

    pub fn n_classes(&self) -> usize {
        self.y.iter().max().map_or(0, |&m| m + 1)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes()];
        for &l in &self.y {
            c[l] += 1;
        }
        c
    }

    pub fn proportions(&self) -> Vec<f64> {
        let n = self.y.len() as f64;
        self.class_counts().iter().map(|&c| c as f64 / n).collect()
    }

    /// Same points and labels in a random row order.
    pub fn shuffled<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self> {
        let mut idx: Vec<usize> = (0..self.y.len()).collect();
        idx.shuffle(rng);
        Ok(Self { x: self.x.select_rows(&idx)?, y: idx.iter().map(|&i| self.y[i]).collect(), name: self.name.clone() })
    }
}

fn jitter<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    }
}

/// Evenly spaced parameter values on `[lo, hi]`, endpoints included.
fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| lo + step * i as f64)
}

fn build(name: &str, rows: Vec<[f64; 2]>, y: Vec<usize>) -> Result<LabeledDataset> {
    LabeledDataset::new(name, DataMatrix::from_rows(&rows)?, y)
}

/// Two interleaving half circles: class 0 is the upper unit arc centered at
/// the origin, class 1 the lower unit arc centered at `(1, 0.5)`.
pub fn moons<R: Rng + ?Sized>(n: usize, noise_sigma: f64, rng: &mut R) -> Result<LabeledDataset> {
    if n < 2 {
        return Err(Error::Config("moons needs at least 2 points".into()));
    }
    let n_upper = n / 2;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for th in linspace(0.0, PI, n_upper) {
        rows.push([th.cos(), th.sin()]);
        y.push(0);
    }
    for th in linspace(0.0, PI, n - n_upper) {
        rows.push([1.0 - th.cos(), 0.5 - th.sin()]);
        y.push(1);
    }
    for r in &mut rows {
        r[0] += jitter(noise_sigma, rng);
        r[1] += jitter(noise_sigma, rng);
    }
    build("moons", rows, y)
}

/// Concentric circles: class 0 of radius 1, class 1 of radius `radius_ratio`.
pub fn circles<R: Rng + ?Sized>(n: usize, radius_ratio: f64, noise_sigma: f64, rng: &mut R) -> Result<LabeledDataset> {
    if !(radius_ratio > 0.0 && radius_ratio < 1.0) {
        return Err(Error::InvalidRatio(radius_ratio));
    }
    if n < 2 {
        return Err(Error::Config("circles needs at least 2 points".into()));
    }
    let n_outer = n / 2;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for (class, count, radius) in [(0, n_outer, 1.0), (1, n - n_outer, radius_ratio)] {
        for i in 0..count {
            let th = 2.0 * PI * i as f64 / count as f64;
            rows.push([radius * th.cos() + jitter(noise_sigma, rng), radius * th.sin() + jitter(noise_sigma, rng)]);
            y.push(class);
        }
    }
    build("circles", rows, y)
}

/// Sizes for `n` points split by `fractions`: all classes but the last are
/// rounded, the last takes the remainder.
fn split_sizes(n: usize, fractions: &[f64]) -> Vec<usize> {
    let mut sizes: Vec<usize> =
        fractions[..fractions.len() - 1].iter().map(|w| (w * n as f64).round() as usize).collect();
    let used: usize = sizes.iter().sum();
    sizes.push(n.saturating_sub(used));
    sizes
}

pub const SMILE_EYE_CENTERS: [[f64; 2]; 2] = [[-0.4, 0.35], [0.4, 0.35]];
const SMILE_EYE_SIGMA: f64 = 0.07;
const SMILE_MOUTH_RADIUS: f64 = 0.55;
const SMILE_LINE_SIGMA: f64 = 0.025;

/// A smiling face in four equal classes: left eye (0) and right eye (1) are
/// Gaussian spots at `(-0.4, 0.35)` and `(0.4, 0.35)` with sigma 0.07, the
/// mouth (2) is the lower arc of radius 0.55 between angles `pi + 0.5` and
/// `2 pi - 0.5`, and the outline (3) is the unit circle. Arcs carry
/// Gaussian jitter of 0.025.
pub fn smile<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LabeledDataset> {
    if n < 4 {
        return Err(Error::Config("smile needs at least 4 points".into()));
    }
    let sizes = split_sizes(n, &[0.25; 4]);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for (class, center) in SMILE_EYE_CENTERS.iter().enumerate() {
        for _ in 0..sizes[class] {
            rows.push([center[0] + jitter(SMILE_EYE_SIGMA, rng), center[1] + jitter(SMILE_EYE_SIGMA, rng)]);
            y.push(class);
        }
    }
    for th in linspace(PI + 0.5, 2.0 * PI - 0.5, sizes[2]) {
        rows.push([
            SMILE_MOUTH_RADIUS * th.cos() + jitter(SMILE_LINE_SIGMA, rng),
            SMILE_MOUTH_RADIUS * th.sin() + jitter(SMILE_LINE_SIGMA, rng),
        ]);
        y.push(2);
    }
    for i in 0..sizes[3] {
        let th = 2.0 * PI * i as f64 / sizes[3] as f64;
        rows.push([th.cos() + jitter(SMILE_LINE_SIGMA, rng), th.sin() + jitter(SMILE_LINE_SIGMA, rng)]);
        y.push(3);
    }
    build("smile", rows, y)
}

pub const IMPOSSIBLE_N: usize = 3594;
pub const IMPOSSIBLE_WEIGHTS: [f64; 7] = [0.248, 0.188, 0.113, 0.075, 0.125, 0.125, 0.125];
pub const IMPOSSIBLE_BLOB_CENTERS: [[f64; 2]; 3] = [[-2.0, -8.0], [3.0, -8.0], [8.0, -8.0]];

/// Seven shapes meant to defeat centroid-based methods:
///
/// * 0: arc of radius 4 about the origin, angles `[0.2 pi, 1.8 pi]` (opens right)
/// * 1: arc of radius 2.5 about the origin, angles `[-0.8 pi, 0.8 pi]` (opens left)
/// * 2, 3: two interleaved one-turn spiral arms about `(11, 0)`,
///   radius `0.6 + 2.4 s` at angle `2 pi s` (arm 3 rotated by `pi`)
/// * 4, 5, 6: isotropic Gaussian blobs (sigma 0.5) at `(-2, -8)`, `(3, -8)`, `(8, -8)`
///
/// Arcs and spirals carry Gaussian jitter of 0.12 and 0.08.
pub fn impossible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LabeledDataset> {
    if n < 7 {
        return Err(Error::Config("impossible needs at least 7 points".into()));
    }
    // the remainder class absorbs the rounding of the first six
    let sizes = split_sizes(n, &IMPOSSIBLE_WEIGHTS);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);

    for (class, radius, lo, hi) in [(0, 4.0, 0.2 * PI, 1.8 * PI), (1, 2.5, -0.8 * PI, 0.8 * PI)] {
        for th in linspace(lo, hi, sizes[class]) {
            rows.push([radius * th.cos() + jitter(0.12, rng), radius * th.sin() + jitter(0.12, rng)]);
            y.push(class);
        }
    }
    for (class, phase) in [(2, 0.0), (3, PI)] {
        for s in linspace(0.0, 1.0, sizes[class]) {
            let r = 0.6 + 2.4 * s;
            let th = 2.0 * PI * s + phase;
            rows.push([11.0 + r * th.cos() + jitter(0.08, rng), r * th.sin() + jitter(0.08, rng)]);
            y.push(class);
        }
    }
    for (b, center) in IMPOSSIBLE_BLOB_CENTERS.iter().enumerate() {
        for _ in 0..sizes[4 + b] {
            rows.push([center[0] + jitter(0.5, rng), center[1] + jitter(0.5, rng)]);
            y.push(4 + b);
        }
    }
    build("impossible", rows, y)
}

/// Isotropic Gaussian clusters with centers drawn uniformly in
/// `[-10, 10]^d` and unit spread; used for timing sweeps.
pub fn gaussian_blobs<R: Rng + ?Sized>(n: usize, k: usize, d: usize, rng: &mut R) -> Result<LabeledDataset> {
    if k == 0 || d == 0 || n < k {
        return Err(Error::Config(format!("cannot draw {n} points in {k} clusters of dimension {d}")));
    }
    let centers: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
    let mut values = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % k;
        for &mu in &centers[c] {
            values.push(mu + jitter(1.0, rng));
        }
        y.push(c);
    }
    LabeledDataset::new("blobs", DataMatrix::new(n, d, values)?, y)
}

/// Adds independent `N(0, sigma^2)` noise to every coordinate.
pub fn add_gaussian_noise<R: Rng + ?Sized>(ds: &LabeledDataset, sigma: f64, rng: &mut R) -> Result<LabeledDataset> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::Config(format!("noise sigma {sigma} must be finite and nonnegative")));
    }
    if sigma == 0.0 {
        return Ok(ds.clone());
    }
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let values: Vec<f64> = ds.x.as_slice().iter().map(|v| v + normal.sample(rng)).collect();
    LabeledDataset::new(
        format!("{}+gaussian", ds.name),
        DataMatrix::new(ds.x.rows(), ds.x.cols(), values)?,
        ds.y.clone(),
    )
}

/// Appends `count` points drawn uniformly over the bounding box of the
/// data, labeled with a fresh class index (the current class count).
pub fn add_uniform_noise<R: Rng + ?Sized>(ds: &LabeledDataset, count: usize, rng: &mut R) -> Result<LabeledDataset> {
    if count == 0 {
        return Ok(ds.clone());
    }
    let bbox = ds.x.bounding_box();
    let noise_class = ds.n_classes();
    let mut values = ds.x.as_slice().to_vec();
    for _ in 0..count {
        for &(lo, hi) in &bbox {
            values.push(if hi > lo { rng.random_range(lo..=hi) } else { lo });
        }
    }
    let mut y = ds.y.clone();
    y.extend(std::iter::repeat_n(noise_class, count));
    LabeledDataset::new(format!("{}+uniform", ds.name), DataMatrix::new(ds.x.rows() + count, ds.x.cols(), values)?, y)
}

/// Names accepted by [`generate`].
pub const GENERATORS: [&str; 4] = ["moons", "circles", "smile", "impossible"];

/// Dataset by name with the benchmark defaults: 1000 points (3594 for
/// impossible), moons noise 0.05, circles ratio 0.5 and noise 0.02.
pub fn generate<R: Rng + ?Sized>(name: &str, n: Option<usize>, rng: &mut R) -> Result<LabeledDataset> {
    match name {
        "moons" => moons(n.unwrap_or(1000), 0.05, rng),
        "circles" => circles(n.unwrap_or(1000), 0.5, 0.02, rng),
        "smile" => smile(n.unwrap_or(1000), rng),
        "impossible" => impossible(n.unwrap_or(IMPOSSIBLE_N), rng),
        other => Err(Error::Config(format!("unknown dataset {other:?}; valid names: {}", GENERATORS.join(", ")))),
    }
}

/// Contents of a numeric CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub x: DataMatrix,
    /// Factor-encoded label column, codes in first-occurrence order.
    pub labels: Option<Vec<usize>>,
    /// Original label strings, indexed by code.
    pub label_names: Vec<String>,
    pub header: Option<Vec<String>>,
}

impl CsvData {
    pub fn into_dataset(self, name: impl Into<String>) -> Result<LabeledDataset> {
        let y = self.labels.ok_or_else(|| Error::Config("file has no label column".into()))?;
        LabeledDataset::new(name, self.x, y)
    }
}

/// Reads a rectangular numeric CSV. `label_column` selects a column to
/// factor-encode instead of parsing as a number.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool, label_column: Option<usize>) -> Result<CsvData> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(has_header).flexible(true).from_reader(file);

    let header = if has_header {
        let h = reader.headers().map_err(|e| csv_error(path, e))?;
        Some(h.iter().map(str::to_string).collect::<Vec<_>>())
    } else {
        None
    };

    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut rows = 0;
    let mut label_names: Vec<String> = Vec::new();
    let mut labels = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec.get(0).is_some_and(|s| s.trim().is_empty()) {
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(Error::RaggedRows { path: path.to_path_buf(), line, expected, found: rec.len() });
        }
        if let Some(lc) = label_column {
            if lc >= expected {
                return Err(Error::Config(format!("label column {lc} out of range for {expected} columns")));
            }
        }
        for (col, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            if Some(col) == label_column {
                let code = match label_names.iter().position(|n| n == cell) {
                    Some(c) => c,
                    None => {
                        label_names.push(cell.to_string());
                        label_names.len() - 1
                    }
                };
                labels.push(code);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => return Err(Error::NonNumericCell { path: path.to_path_buf(), line, col, cell: cell.to_string() }),
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptyInput);
    }
    let cols = values.len() / rows;
    Ok(CsvData { x: DataMatrix::new(rows, cols, values)?, labels: label_column.map(|_| labels), label_names, header })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Parse { path: path.to_path_buf(), line, msg: format!("{kind:?}") },
    }
}

/// Writes `x0..x{d-1},label`, values in shortest round-trip form.
/// Writes `x0,...,x{d-1},label` rows with a header.
pub fn write_dataset<W: Write + ?Sized>(ds: &LabeledDataset, w: &mut W) -> std::io::Result<()> {
    let header: Vec<String> = (0..ds.x.cols()).map(|j| format!("x{j}")).chain(["label".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for (r, y) in ds.x.iter_rows().zip(&ds.y) {
        for v in r {
            write!(w, "{v},")?;
        }
        writeln!(w, "{y}")?;
    }
    Ok(())
}

/// Writes `row,label` lines with a header.
pub fn write_labels<W: Write + ?Sized>(labels: &[usize], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "row,label")?;
    for (i, l) in labels.iter().enumerate() {
        writeln!(w, "{i},{l}")?;
    }
    Ok(())
}

fn save_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let wrap = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    f(&mut w).and_then(|_| w.flush()).map_err(wrap)
}

pub fn save_dataset(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    save_with(path.as_ref(), |w| write_dataset(ds, w))
}

pub fn save_labels(labels: &[usize], path: impl AsRef<Path>) -> Result<()> {
    save_with(path.as_ref(), |w| write_labels(labels, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::stage;
    use crate::numerics::RngState;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        RngState::new(seed).stream(stage::DATA)
    }

    #[test]
    fn moons_shape() {
        let ds = moons(1000, 0.0, &mut rng(0)).unwrap();
        assert_eq!(ds.class_counts(), vec![500, 500]);
        for (r, &y) in ds.x.iter_rows().zip(&ds.y) {
            if y == 0 {
                assert!(r[1] >= 0.0);
            }
        }
    }

    #[test]
    fn moons_noise_stays_near_arcs() {
        let sigma = 0.05;
        let clean = moons(1000, 0.0, &mut rng(1)).unwrap();
        let noisy = moons(1000, sigma, &mut rng(1)).unwrap();
        // distance to the ideal arc is at most the displacement from its ideal point
        let near = clean
            .x
            .iter_rows()
            .zip(noisy.x.iter_rows())
            .filter(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() <= 5.0 * sigma)
            .count();
        assert!(near as f64 >= 0.99 * 1000.0);
    }

    #[test]
    fn circles_shape() {
        let ds = circles(1000, 0.5, 0.0, &mut rng(2)).unwrap();
        assert_eq!(ds.class_counts(), vec![500, 500]);
        for (r, &y) in ds.x.iter_rows().zip(&ds.y) {
            if y == 0 {
                assert!(((r[0] * r[0] + r[1] * r[1]).sqrt() - 1.0).abs() < 1e-12);
            }
        }
        assert!(matches!(circles(10, 1.0, 0.0, &mut rng(0)), Err(Error::InvalidRatio(_))));
        assert!(matches!(circles(10, 0.0, 0.0, &mut rng(0)), Err(Error::InvalidRatio(_))));
    }

    #[test]
    fn circles_radial_gap() {
        let sigma = 0.02;
        let ds = circles(1000, 0.5, sigma, &mut rng(3)).unwrap();
        let radius = |r: &[f64]| (r[0] * r[0] + r[1] * r[1]).sqrt();
        let outer_min =
            ds.x.iter_rows().zip(&ds.y).filter(|(_, &y)| y == 0).map(|(r, _)| radius(r)).fold(f64::INFINITY, f64::min);
        let inner_max =
            ds.x.iter_rows().zip(&ds.y).filter(|(_, &y)| y == 1).map(|(r, _)| radius(r)).fold(0.0, f64::max);
        assert!(outer_min - inner_max >= 0.5 - 10.0 * sigma);
    }

    #[test]
    fn smile_shape() {
        let ds = smile(1000, &mut rng(4)).unwrap();
        assert_eq!(ds.class_counts(), vec![250; 4]);
        let mean = |c: usize| {
            let rows: Vec<&[f64]> = ds.x.iter_rows().zip(&ds.y).filter(|(_, &y)| y == c).map(|(r, _)| r).collect();
            let n = rows.len() as f64;
            [rows.iter().map(|r| r[0]).sum::<f64>() / n, rows.iter().map(|r| r[1]).sum::<f64>() / n]
        };
        let (l, r) = (mean(0), mean(1));
        assert!(l[0] < 0.0 && r[0] > 0.0);
        assert!((l[0] + r[0]).abs() < 0.05 && (l[1] - r[1]).abs() < 0.05);
        let eye_floor = l[1].min(r[1]);
        for (p, &y) in ds.x.iter_rows().zip(&ds.y) {
            if y == 2 {
                assert!(p[1] < eye_floor);
            }
        }
    }

    #[test]
    fn impossible_proportions() {
        let ds = impossible(IMPOSSIBLE_N, &mut rng(5)).unwrap();
        let want = [891, 676, 406, 270, 449, 449, 453];
        for (got, want) in ds.class_counts().iter().zip(want) {
            assert!(got.abs_diff(want) <= 1, "{got} vs {want}");
        }
        assert!(ds.x.as_slice().iter().all(|v| v.is_finite()));
        let shuffled = ds.shuffled(&mut rng(6)).unwrap();
        assert_eq!(shuffled.class_counts(), ds.class_counts());
    }

    #[test]
    fn generators_are_seed_deterministic() {
        for name in GENERATORS {
            assert_eq!(generate(name, None, &mut rng(7)).unwrap(), generate(name, None, &mut rng(7)).unwrap());
        }
        assert!(generate("spiral", None, &mut rng(0)).is_err());
    }

    #[test]
    fn gaussian_noise_variance() {
        let ds = impossible(IMPOSSIBLE_N, &mut rng(8)).unwrap();
        assert_eq!(add_gaussian_noise(&ds, 0.0, &mut rng(0)).unwrap(), ds);
        let sigma = 0.1;
        let noisy = add_gaussian_noise(&ds, sigma, &mut rng(9)).unwrap();
        assert_eq!(noisy.y, ds.y);
        for j in 0..2 {
            let diffs: Vec<f64> = ds.x.iter_rows().zip(noisy.x.iter_rows()).map(|(a, b)| b[j] - a[j]).collect();
            let n = diffs.len() as f64;
            let mean = diffs.iter().sum::<f64>() / n;
            let var = diffs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!((var / (sigma * sigma) - 1.0).abs() < 0.2);
        }
    }

    #[test]
    fn uniform_noise_in_bounding_box() {
        let ds = impossible(IMPOSSIBLE_N, &mut rng(10)).unwrap();
        assert_eq!(add_uniform_noise(&ds, 0, &mut rng(0)).unwrap(), ds);
        let noisy = add_uniform_noise(&ds, 250, &mut rng(11)).unwrap();
        assert_eq!(noisy.x.rows(), 3844);
        assert_eq!(&noisy.y[..IMPOSSIBLE_N], &ds.y[..]);
        assert!(noisy.y[IMPOSSIBLE_N..].iter().all(|&l| l == 7));
        let bb = ds.x.bounding_box();
        for (j, (lo, hi)) in noisy.x.bounding_box().iter().enumerate() {
            assert!(*lo >= bb[j].0 && *hi <= bb[j].1);
        }
    }

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn csv_plain_and_labeled() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "1,2\n3,4\r\n5,6\n");
        let d = load_csv(&p, false, None).unwrap();
        assert_eq!(d.x, DataMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap());
        assert!(d.labels.is_none());

        let p = write(&dir, "b.csv", "a,b,class\n1,2,cat\n3,4,dog\n5,6,cat\n");
        let d = load_csv(&p, true, Some(2)).unwrap();
        assert_eq!(d.labels, Some(vec![0, 1, 0]));
        assert_eq!(d.label_names, vec!["cat", "dog"]);
        assert_eq!(d.x.cols(), 2);
    }

    #[test]
    fn csv_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "r.csv", "1,2\n3,4\n5\n");
        assert!(matches!(load_csv(&p, false, None), Err(Error::RaggedRows { line: 3, expected: 2, found: 1, .. })));
        let p = write(&dir, "n.csv", "1,2\n3,x\n");
        assert!(matches!(load_csv(&p, false, None), Err(Error::NonNumericCell { line: 2, col: 1, .. })));
        let missing = dir.path().join("nope.csv");
        let err = load_csv(&missing, false, None).unwrap_err();
        assert!(err.to_string().contains("nope.csv"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn csv_round_trip_is_exact(vals in prop::collection::vec(-1e12f64..1e12, 2..60), seed in 0u64..10) {
            let n = vals.len() / 2;
            let x = DataMatrix::new(n, 2, vals[..2 * n].to_vec()).unwrap();
            let y: Vec<usize> = (0..n).map(|i| (i + seed as usize) % 3).collect();
            let ds = LabeledDataset::new("t", x, y).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("ds.csv");
            save_dataset(&ds, &p).unwrap();
            let back = load_csv(&p, true, Some(2)).unwrap();
            prop_assert_eq!(&back.x, &ds.x);
            let names: Vec<usize> = back.label_names.iter().map(|s| s.parse().unwrap()).collect();
            let decoded: Vec<usize> = back.labels.unwrap().iter().map(|&c| names[c]).collect();
            prop_assert_eq!(decoded, ds.y);
        }
    }
}
