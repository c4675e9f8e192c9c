//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure. Every failure prints one diagnostic line on stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bridge::DEFAULT_M_FACTOR;
use crate::data::{self, LabeledDataset};
use crate::error::{Error, ErrorClass, Result};
use crate::eval::{self, EvalReport, Sweep};
use crate::model::{self, ClusterModel, SBConfig};
use crate::numerics::rng::stage;
use crate::numerics::RngState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Environment variable capping worker threads (0 = automatic).
pub const THREADS_ENV: &str = "SB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "spectral-bridges", version, about = "Spectral Bridges clustering and benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// The file has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Zero-based column holding ground-truth labels (excluded from features).
    #[arg(long)]
    pub label_column: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write per-point labels.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        /// Number of clusters K.
        #[arg(short = 'k', long = "clusters")]
        clusters: usize,
        /// Number of Voronoi regions m.
        #[arg(short = 'm', long = "nodes")]
        nodes: usize,
        /// Affinity spread factor M.
        #[arg(long = "bigm", default_value_t = DEFAULT_M_FACTOR)]
        bigm: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Labels output (`row,label`).
        #[arg(long, default_value = "labels.csv")]
        out: PathBuf,
        /// Also write the fitted model as JSON.
        #[arg(long)]
        model_out: Option<PathBuf>,
        /// Summary format on stdout.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Label new points with a saved model.
    Predict {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        model: PathBuf,
        /// Labels output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic benchmark dataset as labeled CSV.
    Generate {
        /// One of: moons, circles, smile, impossible.
        name: String,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of points (benchmark default when omitted).
        #[arg(short = 'n', long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Time model fits over a sweep of n or m.
    Bench {
        /// Swept variable.
        #[arg(long, value_enum, default_value_t = SweepVar::N)]
        sweep: SweepVar,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// k-means restarts inside each fit.
        #[arg(long, default_value_t = crate::quantize::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// WCSS curve over candidate region counts and a suggested m.
    Elbow {
        #[command(flatten)]
        input: InputArgs,
        #[arg(short = 'k', long = "clusters")]
        clusters: usize,
        /// Comma-separated candidate values of m (all > K).
        #[arg(long, value_delimiter = ',', required = true)]
        candidates: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run a named experiment preset.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
        /// Dataset for msweep.
        #[arg(long, default_value = "moons")]
        dataset: String,
        /// Comma-separated region counts (msweep) or the single m (noise).
        #[arg(short = 'm', long = "m", value_delimiter = ',')]
        m: Option<Vec<usize>>,
        /// Number of clusters; dataset default when omitted.
        #[arg(short = 'k', long = "clusters")]
        clusters: Option<usize>,
        /// Seeds averaged per m in msweep.
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    N,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentName {
    Noise,
    Msweep,
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Config => EXIT_CONFIG,
        ErrorClass::Data => EXIT_DATA,
        ErrorClass::Numeric => EXIT_NUMERIC,
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Reads [`THREADS_ENV`]; `Ok(None)` means automatic.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        },
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Fit { input, clusters, nodes, bigm, seed, out, model_out, format } => {
            cmd_fit(&input, clusters, nodes, bigm, seed, &out, model_out.as_deref(), format)
        }
        Command::Predict { input, model, out } => cmd_predict(&input, &model, out.as_deref()),
        Command::Generate { name, out, n, seed } => cmd_generate(&name, out.as_deref(), n, seed),
        Command::Bench { sweep, values, reps, restarts, seed, out, format } => {
            cmd_bench(sweep, values, reps, restarts, seed, out.as_deref(), format)
        }
        Command::Elbow { input, clusters, candidates, restarts, seed, out, format } => {
            cmd_elbow(&input, clusters, &candidates, restarts, seed, out.as_deref(), format)
        }
        Command::Experiment { name, dataset, m, clusters, reps, seed, out, format } => {
            cmd_experiment(name, &dataset, m, clusters, reps, seed, out.as_deref(), format)
        }
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_with<F>(path: Option<&Path>, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let mut w = open_out(path)?;
    let target = path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(target, e))
}

fn load_input(input: &InputArgs) -> Result<data::CsvData> {
    data::load_csv(&input.input, !input.no_header, input.label_column)
}

#[derive(Serialize)]
struct FitSummary {
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    m: usize,
    #[serde(rename = "M")]
    m_factor: f64,
    gamma: f64,
    wcss: f64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ari: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nmi: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    input: &InputArgs,
    k: usize,
    m: usize,
    bigm: f64,
    seed: u64,
    out: &Path,
    model_out: Option<&Path>,
    format: Format,
) -> Result<()> {
    let cfg = SBConfig::new(k, m).with_seed(seed).with_m_factor(bigm);
    // flag consistency before touching the data
    if k == 0 || k > m {
        return Err(Error::Config(format!("--clusters ({k}) must be between 1 and --nodes ({m})")));
    }
    if !bigm.is_finite() || bigm <= 1.0 {
        return Err(Error::InvalidFactor(bigm));
    }
    let csv = load_input(input)?;
    let model = model::fit(&csv.x, &cfg)?;
    let labels = model.point_labels().expect("fresh fit");
    data::save_labels(labels, out)?;
    if let Some(p) = model_out {
        let json = model.to_json()?;
        std::fs::write(p, json + "\n").map_err(|e| Error::io(p, e))?;
    }
    let (ari, nmi) = match &csv.labels {
        Some(y) => (Some(eval::ari(y, labels)?), Some(eval::nmi(y, labels)?)),
        None => (None, None),
    };
    let summary =
        FitSummary { n: csv.x.rows(), k, m, m_factor: bigm, gamma: model.gamma(), wcss: model.wcss(), seed, ari, nmi };
    write_with(None, |w| match format {
        Format::Json => writeln!(w, "{}", serde_json::to_string(&summary).map_err(io::Error::other)?),
        Format::Csv => {
            writeln!(w, "key,value")?;
            let v = serde_json::to_value(&summary).map_err(io::Error::other)?;
            for (key, val) in v.as_object().expect("struct") {
                writeln!(w, "{key},{val}")?;
            }
            Ok(())
        }
    })
}

fn cmd_predict(input: &InputArgs, model_path: &Path, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(model_path).map_err(|e| Error::io(model_path, e))?;
    let model = ClusterModel::from_json(&text)?;
    let csv = load_input(input)?;
    let labels = model.predict(&csv.x)?;
    match out {
        Some(p) => data::save_labels(&labels, p),
        None => write_with(None, |w| data::write_labels(&labels, w)),
    }
}

fn cmd_generate(name: &str, out: Option<&Path>, n: Option<usize>, seed: u64) -> Result<()> {
    let ds = data::generate(name, n, &mut RngState::new(seed).stream(stage::DATA))?;
    write_with(out, |w| data::write_dataset(&ds, w))
}

fn cmd_bench(
    sweep: SweepVar,
    values: Option<Vec<usize>>,
    reps: usize,
    restarts: usize,
    seed: u64,
    out: Option<&Path>,
    format: Format,
) -> Result<()> {
    if restarts == 0 {
        return Err(Error::Config("--restarts must be positive".into()));
    }
    let sweep = match sweep {
        SweepVar::N => Sweep::Samples(values.unwrap_or_else(|| vec![1000, 2000, 4000, 8000])),
        SweepVar::M => Sweep::Regions(values.unwrap_or_else(|| vec![50, 100, 200, 400])),
    };
    if let Sweep::Regions(ms) = &sweep {
        if let Some(&bad) = ms.iter().find(|&&m| !(eval::TIMING_K..=eval::TIMING_FIXED_N).contains(&m)) {
            return Err(Error::InvalidM { m: bad, lo: eval::TIMING_K, hi: eval::TIMING_FIXED_N });
        }
    }
    let table = eval::time_fit(&sweep, reps, restarts, seed)?;
    write_with(out, |w| match format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&table).map_err(io::Error::other)?),
        Format::Csv => {
            writeln!(w, "{},mean_millis,std_millis", table.variable)?;
            for r in &table.rows {
                writeln!(w, "{},{},{}", r.x, r.mean_millis, r.std_millis)?;
            }
            if let Some(f) = table.fit {
                writeln!(w, "# slope={} intercept={} r2={}", f.slope, f.intercept, f.r2)?;
            }
            Ok(())
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_elbow(
    input: &InputArgs,
    k: usize,
    candidates: &[usize],
    restarts: usize,
    seed: u64,
    out: Option<&Path>,
    format: Format,
) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("--clusters must be positive".into()));
    }
    if let Some(&bad) = candidates.iter().find(|&&c| c <= k) {
        return Err(Error::InvalidM { m: bad, lo: k + 1, hi: usize::MAX });
    }
    let csv = load_input(input)?;
    let s = model::suggest_m(&csv.x, k, candidates, restarts.max(1), RngState::new(seed))?;
    write_with(out, |w| match format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&s).map_err(io::Error::other)?),
        Format::Csv => {
            writeln!(w, "m,wcss")?;
            for (m, wcss) in &s.curve {
                writeln!(w, "{m},{wcss}")?;
            }
            writeln!(w, "# recommended_m={}", s.recommended)
        }
    })
}

fn default_k(dataset: &str) -> usize {
    match dataset {
        "smile" => 4,
        "impossible" => 7,
        _ => 2,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    name: ExperimentName,
    dataset: &str,
    m: Option<Vec<usize>>,
    clusters: Option<usize>,
    reps: usize,
    seed: u64,
    out: Option<&Path>,
    format: Format,
) -> Result<()> {
    let reports: Vec<EvalReport> = match name {
        ExperimentName::Noise => {
            let m = match m.as_deref() {
                None => 250,
                Some([m]) => *m,
                Some(_) => return Err(Error::Config("noise experiment takes a single --m".into())),
            };
            eval::noise_experiment(clusters.unwrap_or(7), m, seed)?
        }
        ExperimentName::Msweep => {
            let k = clusters.unwrap_or_else(|| default_k(dataset));
            let ms = m.unwrap_or_else(|| vec![2, 12, 24]);
            let ds: LabeledDataset = data::generate(dataset, None, &mut RngState::new(seed).stream(stage::DATA))?;
            eval::m_sweep(&ds, k, &ms, reps, seed)?
                .into_iter()
                .map(|r| EvalReport {
                    dataset: ds.name.clone(),
                    method: "spectral-bridges".into(),
                    seed,
                    m: r.m,
                    k,
                    ari: r.mean_ari,
                    nmi: r.mean_nmi,
                    fit_millis: r.mean_fit_millis,
                })
                .collect()
        }
    };
    write_with(out, |w| match format {
        Format::Csv => eval::write_reports_csv(w, &reports),
        Format::Json => eval::write_reports_jsonl(w, &reports),
    })
}
