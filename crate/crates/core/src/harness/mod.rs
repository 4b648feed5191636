//! Seeded experiment sweeps over model grids, with canonical CSV output.
//!
//! A sweep is the product `grid point × seed`. Every cell samples one graph and
//! runs each requested algorithm on it. Cells run in parallel but rows are always
//! emitted grid-major, then by seed, then in the configured algorithm order.
//!
//! The model seed of a cell depends on the master seed and the replicate seed
//! only, so every grid point of a sweep sees the same labels and positions for a
//! given replicate.

pub mod motif;
pub mod presets;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{KernelConfig, KernelSpec};
use crate::model::{io::write_labelling, sample_graph, Labelling, SgbmParams};
use crate::rng::derive_seed;
use crate::spectral::{
    eigendecompose, fiedler_partition, hosc_from_spectrum, ideal_eigenvalue, local_improvement,
    misclassified, per_eigenvector_accuracy, Spectrum,
};

pub use motif::{motif_baseline, MotifOutcome};

/// Clustering methods a sweep can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Hosc,
    HoscLi,
    Fiedler,
    MotifBaseline,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Hosc, Algorithm::HoscLi, Algorithm::Fiedler, Algorithm::MotifBaseline];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Hosc => "hosc",
            Algorithm::HoscLi => "hosc_li",
            Algorithm::Fiedler => "fiedler",
            Algorithm::MotifBaseline => "motif_baseline",
        }
    }

    fn needs_spectrum(self) -> bool {
        !matches!(self, Algorithm::MotifBaseline)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?} (expected hosc, hosc_li, fiedler or motif_baseline)")))
    }
}

/// One model of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub f_in: KernelSpec,
    pub f_out: KernelSpec,
}

impl GridPoint {
    pub fn new(n: usize, f_in: KernelSpec, f_out: KernelSpec) -> Self {
        GridPoint { n, f_in, f_out }
    }

    pub fn params(&self, seed: u64) -> Result<SgbmParams> {
        SgbmParams::new(self.n, self.f_in, self.f_out, seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub experiment: String,
    pub grid: Vec<GridPoint>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub master_seed: u64,
    /// Keep truth and predicted labellings of every cell.
    pub keep_labels: bool,
    /// Record the accuracy of every eigenvector of every cell.
    pub record_profiles: bool,
}

impl SweepConfig {
    pub fn new(experiment: impl Into<String>, grid: Vec<GridPoint>, seeds: Vec<u64>, algorithms: Vec<Algorithm>) -> Self {
        SweepConfig {
            experiment: experiment.into(),
            grid,
            seeds,
            algorithms,
            master_seed: 0,
            keep_labels: false,
            record_profiles: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("sweep seed list is empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("sweep needs at least one algorithm".into()));
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return Err(Error::Config("sweep algorithms contain duplicates".into()));
        }
        for (i, p) in self.grid.iter().enumerate() {
            p.params(0).map_err(|e| Error::Config(format!("grid point {i}: {e}")))?;
        }
        Ok(())
    }

    /// Model seed of replicate `seed`.
    pub fn sample_seed(&self, seed: u64) -> u64 {
        derive_seed(self.master_seed, &[seed])
    }
}

/// One `(grid point, seed, algorithm)` outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub point: usize,
    pub n: usize,
    pub d: usize,
    pub kernel_in: String,
    pub kernel_out: String,
    pub seed: u64,
    pub algorithm: Algorithm,
    /// `None` on error rows.
    pub accuracy: Option<f64>,
    pub misclassified: Option<usize>,
    pub selected_rank: Option<usize>,
    pub lambda_star: Option<f64>,
    pub lambda_selected: Option<f64>,
    pub gap_to_next: Option<f64>,
    /// Wall time including the shared eigendecomposition; written to the timings file.
    pub runtime_ms: f64,
    /// Error message, or `fallback` for a baseline that fell back to the spectrum.
    pub note: String,
}

impl ResultRow {
    pub fn is_error(&self) -> bool {
        self.accuracy.is_none()
    }
}

/// Per-eigenvector accuracy of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRecord {
    pub point: usize,
    pub seed: u64,
    pub rank: usize,
    pub eigenvalue: f64,
    pub accuracy: f64,
    pub selected: bool,
}

/// Truth and predictions of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLabels {
    pub point: usize,
    pub seed: u64,
    pub truth: Labelling,
    pub predictions: Vec<(Algorithm, Labelling)>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub profiles: Vec<ProfileRecord>,
    pub labels: Vec<CellLabels>,
}

struct CellOutput {
    rows: Vec<ResultRow>,
    profiles: Vec<ProfileRecord>,
    labels: Option<CellLabels>,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs every cell of the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    config.validate()?;
    let cells: Vec<(usize, u64)> = (0..config.grid.len())
        .flat_map(|p| config.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let outputs: Vec<CellOutput> = cells.par_iter().map(|&(p, s)| run_cell(config, p, s)).collect();
    let mut out = SweepOutput::default();
    for c in outputs {
        out.rows.extend(c.rows);
        out.profiles.extend(c.profiles);
        out.labels.extend(c.labels);
    }
    Ok(out)
}

fn run_cell(config: &SweepConfig, point: usize, seed: u64) -> CellOutput {
    let gp = &config.grid[point];
    let template = ResultRow {
        experiment: config.experiment.clone(),
        point,
        n: gp.n,
        d: gp.f_in.dim(),
        kernel_in: gp.f_in.label(),
        kernel_out: gp.f_out.label(),
        seed,
        algorithm: Algorithm::Hosc,
        accuracy: None,
        misclassified: None,
        selected_rank: None,
        lambda_star: None,
        lambda_selected: None,
        gap_to_next: None,
        runtime_ms: 0.0,
        note: String::new(),
    };
    let error_rows = |msg: String| CellOutput {
        rows: config
            .algorithms
            .iter()
            .map(|&a| ResultRow { algorithm: a, note: msg.clone(), ..template.clone() })
            .collect(),
        profiles: Vec::new(),
        labels: None,
    };
    let params = match gp.params(config.sample_seed(seed)) {
        Ok(p) => p,
        Err(e) => return error_rows(e.to_string()),
    };
    let sample = match sample_graph(&params) {
        Ok(s) => s,
        Err(e) => return error_rows(e.to_string()),
    };
    let densities = params.densities();
    let lambda_star = densities
        .as_ref()
        .map_err(|e| e.to_string())
        .and_then(|&(a, b)| ideal_eigenvalue(a, b, gp.n).map_err(|e| e.to_string()));

    let start = Instant::now();
    let spectrum: Option<std::result::Result<Spectrum, String>> = config
        .algorithms
        .iter()
        .any(|a| a.needs_spectrum())
        .then(|| eigendecompose(&sample.graph).map_err(|e| e.to_string()));
    let decomposition_ms = elapsed_ms(start);

    let truth = &sample.labels;
    let mut rows = Vec::with_capacity(config.algorithms.len());
    let mut predictions = Vec::new();
    let mut hosc_labels: Option<(Labelling, _)> = None;
    for &algorithm in &config.algorithms {
        let start = Instant::now();
        let mut row = ResultRow { algorithm, ..template.clone() };
        let outcome: std::result::Result<Labelling, String> = match algorithm {
            Algorithm::Hosc | Algorithm::HoscLi => {
                match (spectrum.as_ref().expect("spectrum computed"), &lambda_star) {
                    (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                    (Ok(s), Ok(ls)) => {
                        let (labels, report) = hosc_labels.get_or_insert_with(|| hosc_from_spectrum(s, *ls)).clone();
                        row.lambda_star = Some(report.lambda_star);
                        row.selected_rank = Some(report.selected_index);
                        row.lambda_selected = Some(report.lambda_selected);
                        row.gap_to_next = Some(report.gap_to_next);
                        if algorithm == Algorithm::HoscLi {
                            local_improvement(&sample.graph, &labels).map_err(|e| e.to_string())
                        } else {
                            Ok(labels)
                        }
                    }
                }
            }
            Algorithm::Fiedler => match spectrum.as_ref().expect("spectrum computed") {
                Err(e) => Err(e.clone()),
                Ok(s) => {
                    row.selected_rank = Some(2);
                    row.lambda_selected = Some(s.eigenvalue(2));
                    row.lambda_star = lambda_star.as_ref().ok().copied();
                    Ok(fiedler_partition(s))
                }
            },
            Algorithm::MotifBaseline => match motif_baseline(&sample.graph) {
                Ok(o) => {
                    if o.fallback {
                        row.note = "fallback".into();
                    }
                    Ok(o.labels)
                }
                Err(e) => Err(e.to_string()),
            },
        };
        row.runtime_ms = elapsed_ms(start) + if algorithm.needs_spectrum() { decomposition_ms } else { 0.0 };
        match outcome {
            Ok(labels) => {
                let errors = misclassified(truth, &labels).expect("lengths agree");
                row.misclassified = Some(errors);
                row.accuracy = Some(1.0 - errors as f64 / gp.n as f64);
                if config.keep_labels {
                    predictions.push((algorithm, labels));
                }
            }
            Err(msg) => row.note = msg,
        }
        rows.push(row);
    }

    let mut profiles = Vec::new();
    if config.record_profiles {
        if let Some(Ok(s)) = &spectrum {
            let selected = hosc_labels.as_ref().map(|(_, r)| r.selected_index);
            profiles = per_eigenvector_accuracy(s, truth)
                .expect("lengths agree")
                .into_iter()
                .map(|r| ProfileRecord {
                    point,
                    seed,
                    rank: r.rank,
                    eigenvalue: r.eigenvalue,
                    accuracy: r.accuracy,
                    selected: Some(r.rank) == selected,
                })
                .collect();
        }
    }
    let labels = config.keep_labels.then(|| CellLabels { point, seed, truth: truth.clone(), predictions });
    CellOutput { rows, profiles, labels }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

/// Column order of the results table.
pub const RESULT_COLUMNS: [&str; 15] = [
    "experiment",
    "point",
    "n",
    "d",
    "kernel_in",
    "kernel_out",
    "seed",
    "algorithm",
    "accuracy",
    "misclassified",
    "selected_rank",
    "lambda_star",
    "lambda_selected",
    "gap_to_next",
    "note",
];

/// Results without timings, so reruns are byte-identical.
pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESULT_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.point.to_string(),
            r.n.to_string(),
            r.d.to_string(),
            r.kernel_in.clone(),
            r.kernel_out.clone(),
            r.seed.to_string(),
            r.algorithm.to_string(),
            opt(&r.accuracy),
            opt(&r.misclassified),
            opt(&r.selected_rank),
            opt(&r.lambda_star),
            opt(&r.lambda_selected),
            opt(&r.gap_to_next),
            r.note.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_timings_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["experiment", "point", "seed", "algorithm", "runtime_ms"])?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.point.to_string(),
            r.seed.to_string(),
            r.algorithm.to_string(),
            format!("{:.3}", r.runtime_ms),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_profiles_csv(path: &Path, profiles: &[ProfileRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["point", "seed", "rank", "eigenvalue", "accuracy", "selected"])?;
    for p in profiles {
        w.write_record([
            p.point.to_string(),
            p.seed.to_string(),
            p.rank.to_string(),
            p.eigenvalue.to_string(),
            p.accuracy.to_string(),
            u8::from(p.selected).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `(mean, standard error)`; the standard error is 0 for fewer than two values.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Most frequent value; ties go to the smallest.
pub fn mode(values: &[usize]) -> Option<usize> {
    let mut counts = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(v, _)| v)
}

/// Aggregate over seeds of one `(grid point, algorithm)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub point: usize,
    pub n: usize,
    pub kernel_in: String,
    pub kernel_out: String,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub errors: usize,
    pub mean_accuracy: f64,
    pub std_error: f64,
    pub mean_misclassified: f64,
    pub modal_rank: Option<usize>,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, Algorithm), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.point, r.algorithm)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((point, algorithm), rs)| {
            let acc: Vec<f64> = rs.iter().filter_map(|r| r.accuracy).collect();
            let mis: Vec<f64> = rs.iter().filter_map(|r| r.misclassified.map(|m| m as f64)).collect();
            let ranks: Vec<usize> = rs.iter().filter(|r| !r.is_error()).filter_map(|r| r.selected_rank).collect();
            let (mean_accuracy, std_error) = mean_and_std_error(&acc);
            SummaryRow {
                point,
                n: rs[0].n,
                kernel_in: rs[0].kernel_in.clone(),
                kernel_out: rs[0].kernel_out.clone(),
                algorithm,
                runs: rs.len(),
                errors: rs.len() - acc.len(),
                mean_accuracy,
                std_error,
                mean_misclassified: mean_and_std_error(&mis).0,
                modal_rank: mode(&ranks),
            }
        })
        .collect()
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

pub fn write_summary_csv(path: &Path, summary: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "point",
        "n",
        "kernel_in",
        "kernel_out",
        "algorithm",
        "runs",
        "errors",
        "mean_accuracy",
        "std_error",
        "mean_misclassified",
        "modal_rank",
    ])?;
    for s in summary {
        w.write_record([
            s.point.to_string(),
            s.n.to_string(),
            s.kernel_in.clone(),
            s.kernel_out.clone(),
            s.algorithm.to_string(),
            s.runs.to_string(),
            s.errors.to_string(),
            fmt_f64(s.mean_accuracy),
            fmt_f64(s.std_error),
            fmt_f64(s.mean_misclassified),
            opt(&s.modal_rank),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct SidecarPoint {
    n: usize,
    d: usize,
    kernel_in: KernelConfig,
    kernel_out: KernelConfig,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    experiment: &'a str,
    version: &'a str,
    created_unix: u64,
    master_seed: u64,
    seeds: &'a [u64],
    algorithms: Vec<&'static str>,
    files: &'a [String],
    grid: Vec<SidecarPoint>,
}

/// Writes `run.toml` with the configuration echo and run metadata.
pub fn write_sidecar(path: &Path, config: &SweepConfig, files: &[String]) -> Result<()> {
    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let sidecar = Sidecar {
        experiment: &config.experiment,
        version: env!("CARGO_PKG_VERSION"),
        created_unix,
        master_seed: config.master_seed,
        seeds: &config.seeds,
        algorithms: config.algorithms.iter().map(|a| a.as_str()).collect(),
        files,
        grid: config
            .grid
            .iter()
            .map(|p| SidecarPoint {
                n: p.n,
                d: p.f_in.dim(),
                kernel_in: KernelConfig::from(&p.f_in),
                kernel_out: KernelConfig::from(&p.f_out),
            })
            .collect(),
    };
    let text = toml::to_string(&sidecar).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl SweepOutput {
    /// Writes `results.csv`, `timings.csv`, `summary.csv`, optional profiles and
    /// labellings, and `run.toml` under `dir`. Returns the file names written.
    pub fn write_to(&self, dir: &Path, config: &SweepConfig) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = vec!["results.csv".to_string(), "timings.csv".into(), "summary.csv".into()];
        write_results_csv(&dir.join("results.csv"), &self.rows)?;
        write_timings_csv(&dir.join("timings.csv"), &self.rows)?;
        write_summary_csv(&dir.join("summary.csv"), &summarize(&self.rows))?;
        if config.record_profiles {
            write_profiles_csv(&dir.join("profiles.csv"), &self.profiles)?;
            files.push("profiles.csv".into());
        }
        if config.keep_labels {
            let labels_dir = dir.join("labels");
            std::fs::create_dir_all(&labels_dir).map_err(|e| Error::io(&labels_dir, e))?;
            for cell in &self.labels {
                let stem = format!("p{}_s{}", cell.point, cell.seed);
                write_labelling(&labels_dir.join(format!("{stem}_truth.txt")), &cell.truth)?;
                for (a, l) in &cell.predictions {
                    write_labelling(&labels_dir.join(format!("{stem}_{a}.txt")), l)?;
                }
            }
            files.push("labels/".into());
        }
        write_sidecar(&dir.join("run.toml"), config, &files)?;
        files.push("run.toml".into());
        Ok(files)
    }
}
