//! Named experiment presets and their derived tables.
//!
//! Default grids follow the published experiments where they are stated. The
//! Waxman grids and the comparison grid are choices that straddle the symmetric
//! diagonals or the quoted timing instance.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::model::{sample_graph, SgbmParams};
use crate::spectral::eigendecompose;
use crate::theory::{isolation_check, limiting_atoms, MatchReport, spectrum_match};

use super::{mean_and_std_error, mode, run_sweep, Algorithm, GridPoint, SweepConfig, SweepOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Accuracy of every eigenvector, `n = 2000`, radii 0.08 / 0.02.
    Fig1,
    /// Small instance where the fourth eigenvector is informative.
    Fig2,
    /// Accuracy against `n` for radii 0.08 / 0.05, with and without local improvement.
    Fig3,
    /// Accuracy and selected rank against `r_in` at `r_out = 0.06`.
    Fig4,
    /// HOSC against the common-neighbour baseline and the Fiedler vector.
    Fig5,
    /// Waxman model, amplitude `q_in` swept around `q_out`.
    WaxmanQ,
    /// Waxman model, decay `s_in` swept around `s_out`.
    WaxmanS,
}

impl Preset {
    pub const ALL: [Preset; 7] =
        [Preset::Fig1, Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::WaxmanQ, Preset::WaxmanS];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::WaxmanQ => "waxman_q",
            Preset::WaxmanS => "waxman_s",
        }
    }

    fn default_ns(self) -> Vec<usize> {
        match self {
            Preset::Fig1 => vec![2000],
            Preset::Fig2 => vec![150],
            Preset::Fig3 => vec![500, 1000, 2000, 4000],
            Preset::Fig4 => vec![3000],
            Preset::Fig5 => vec![1000, 2000, 3000],
            Preset::WaxmanQ | Preset::WaxmanS => vec![500, 1000, 2000],
        }
    }

    fn default_seed_count(self) -> u64 {
        match self {
            Preset::Fig1 | Preset::Fig5 | Preset::WaxmanQ | Preset::WaxmanS => 10,
            Preset::Fig2 | Preset::Fig3 => 20,
            Preset::Fig4 => 5,
        }
    }

    /// Values of the swept kernel parameter, if the preset has one.
    pub fn default_axis(self) -> Option<Vec<f64>> {
        let steps = |lo: f64, step: f64, count: usize| (0..count).map(|i| round6(lo + step * i as f64)).collect();
        match self {
            Preset::Fig4 => Some(steps(0.07, 0.01, 24)),
            Preset::WaxmanQ => Some(steps(0.05, 0.05, 20)),
            Preset::WaxmanS => Some(steps(0.5, 0.5, 20)),
            _ => None,
        }
    }

    fn algorithms(self) -> Vec<Algorithm> {
        match self {
            Preset::Fig1 | Preset::Fig2 => vec![Algorithm::Hosc, Algorithm::Fiedler],
            Preset::Fig3 => vec![Algorithm::Hosc, Algorithm::HoscLi],
            Preset::Fig5 => vec![Algorithm::Hosc, Algorithm::MotifBaseline, Algorithm::Fiedler],
            Preset::Fig4 | Preset::WaxmanQ | Preset::WaxmanS => vec![Algorithm::Hosc],
        }
    }

    /// Kernel pair of a grid point at swept value `x` (ignored without an axis).
    fn kernels(self, x: f64) -> Result<(KernelSpec, KernelSpec)> {
        let ind = |r| KernelSpec::indicator(r, 1);
        Ok(match self {
            Preset::Fig1 => (ind(0.08)?, ind(0.02)?),
            Preset::Fig2 => (ind(0.2)?, ind(0.05)?),
            Preset::Fig3 => (ind(0.08)?, ind(0.05)?),
            Preset::Fig4 => (ind(x)?, ind(FIG4_R_OUT)?),
            Preset::Fig5 => (ind(0.08)?, ind(0.04)?),
            Preset::WaxmanQ => (KernelSpec::waxman(x, WAXMAN_Q_DECAY, 1)?, KernelSpec::waxman(WAXMAN_Q_OUT, WAXMAN_Q_DECAY, 1)?),
            Preset::WaxmanS => (KernelSpec::waxman(WAXMAN_S_AMPLITUDE, x, 1)?, KernelSpec::waxman(WAXMAN_S_AMPLITUDE, WAXMAN_S_OUT, 1)?),
        })
    }

    /// Grid value on the symmetric diagonal, if any.
    pub fn diagonal(self) -> Option<f64> {
        match self {
            Preset::Fig4 => Some(FIG4_R_OUT),
            Preset::WaxmanQ => Some(WAXMAN_Q_OUT),
            Preset::WaxmanS => Some(WAXMAN_S_OUT),
            _ => None,
        }
    }

    /// Builds the sweep configuration, applying any overrides.
    pub fn config(self, overrides: &PresetOverrides) -> Result<SweepConfig> {
        let ns = overrides.ns.clone().unwrap_or_else(|| self.default_ns());
        let seeds = overrides.seeds.clone().unwrap_or_else(|| (0..self.default_seed_count()).collect());
        let axis = match (self.default_axis(), &overrides.axis) {
            (Some(_), Some(values)) => Some(values.clone()),
            (Some(default), None) => Some(default),
            (None, Some(_)) => {
                return Err(Error::Config(format!("preset {self} has no swept kernel parameter")));
            }
            (None, None) => None,
        };
        if let Some(a) = &axis {
            if a.is_empty() {
                return Err(Error::Config("swept parameter grid is empty".into()));
            }
            if self == Preset::Fig4 {
                if let Some(&x) = a.iter().find(|&&x| x <= FIG4_R_OUT) {
                    if x == FIG4_R_OUT {
                        return Err(Error::DegenerateModel(2.0 * x));
                    }
                    return Err(Error::Config(format!("fig4 needs r_in > r_out = {FIG4_R_OUT}, got {x}")));
                }
            }
        }
        let mut grid = Vec::new();
        for &n in &ns {
            match &axis {
                Some(values) => {
                    for &x in values {
                        let (f_in, f_out) = self.kernels(x).map_err(|e| Error::Config(format!("grid value {x}: {e}")))?;
                        grid.push(GridPoint::new(n, f_in, f_out));
                    }
                }
                None => {
                    let (f_in, f_out) = self.kernels(f64::NAN)?;
                    grid.push(GridPoint::new(n, f_in, f_out));
                }
            }
        }
        let mut config = SweepConfig::new(self.as_str(), grid, seeds, self.algorithms());
        config.master_seed = overrides.master_seed.unwrap_or(0);
        config.record_profiles = matches!(self, Preset::Fig1 | Preset::Fig2);
        config.keep_labels = overrides.keep_labels;
        config.validate()?;
        Ok(config)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.as_str()).collect();
            Error::Config(format!("unknown preset {s:?} (expected one of {})", names.join(", ")))
        })
    }
}

pub const FIG4_R_OUT: f64 = 0.06;
pub const WAXMAN_Q_OUT: f64 = 0.5;
pub const WAXMAN_Q_DECAY: f64 = 2.0;
pub const WAXMAN_S_AMPLITUDE: f64 = 1.0;
pub const WAXMAN_S_OUT: f64 = 5.0;
/// Accuracy below which a grid point counts as part of a dip.
pub const DIP_ACCURACY: f64 = 0.9;

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PresetOverrides {
    pub ns: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
    pub axis: Option<Vec<f64>>,
    pub master_seed: Option<u64>,
    pub keep_labels: bool,
}

/// HOSC aggregate at one value of the swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisRow {
    pub n: usize,
    pub x: f64,
    /// NaN when every run errored (the degenerate diagonal).
    pub mean_accuracy: f64,
    pub std_error: f64,
    pub modal_rank: Option<usize>,
    pub errors: usize,
    pub isolation_satisfied: Option<bool>,
}

impl AxisRow {
    /// Accuracy with degenerate points counted as chance level.
    pub fn effective_accuracy(&self) -> f64 {
        if self.mean_accuracy.is_nan() {
            0.5
        } else {
            self.mean_accuracy
        }
    }
}

/// Per-`(n, x)` HOSC table of a swept preset.
pub fn axis_table(preset: Preset, config: &SweepConfig, output: &SweepOutput, cutoff: Option<i64>) -> Result<Vec<AxisRow>> {
    let axis = config_axis(preset, config)?;
    let per_n = axis.len();
    let mut table = Vec::with_capacity(config.grid.len());
    for (p, gp) in config.grid.iter().enumerate() {
        let rows: Vec<_> = output.rows.iter().filter(|r| r.point == p && r.algorithm == Algorithm::Hosc).collect();
        let acc: Vec<f64> = rows.iter().filter_map(|r| r.accuracy).collect();
        let ranks: Vec<usize> = rows.iter().filter(|r| !r.is_error()).filter_map(|r| r.selected_rank).collect();
        let (mean_accuracy, std_error) = mean_and_std_error(&acc);
        let isolation_satisfied = match cutoff {
            Some(k) => isolation_check(&gp.f_in, &gp.f_out, k).ok().map(|r| r.satisfied),
            None => None,
        };
        table.push(AxisRow {
            n: gp.n,
            x: axis[p % per_n],
            mean_accuracy,
            std_error,
            modal_rank: mode(&ranks),
            errors: rows.len() - acc.len(),
            isolation_satisfied,
        });
    }
    Ok(table)
}

fn config_axis(preset: Preset, config: &SweepConfig) -> Result<Vec<f64>> {
    let value = |k: &KernelSpec| match (preset, k.kind()) {
        (Preset::Fig4, crate::kernels::KernelKind::Indicator { r }) => Some(r),
        (Preset::WaxmanQ, crate::kernels::KernelKind::Waxman { q, .. }) => Some(q),
        (Preset::WaxmanS, crate::kernels::KernelKind::Waxman { s, .. }) => Some(s),
        _ => None,
    };
    let first_n = config.grid.first().map(|g| g.n);
    let axis: Option<Vec<f64>> = config
        .grid
        .iter()
        .take_while(|g| Some(g.n) == first_n)
        .map(|g| value(&g.f_in))
        .collect();
    axis.ok_or_else(|| Error::Config(format!("preset {preset} has no swept kernel parameter")))
}

/// Checks that around every change of modal rank between adjacent grid
/// values, the worse of the two points has mean accuracy below the median.
/// Returns the number of rank changes and how many of them show that dip.
pub fn dips_at_rank_changes(table: &[AxisRow]) -> (usize, usize) {
    let mut acc: Vec<f64> = table.iter().map(AxisRow::effective_accuracy).collect();
    acc.sort_by(f64::total_cmp);
    let median = if acc.is_empty() {
        f64::NAN
    } else if acc.len() % 2 == 1 {
        acc[acc.len() / 2]
    } else {
        (acc[acc.len() / 2 - 1] + acc[acc.len() / 2]) / 2.0
    };
    let mut changes = 0;
    let mut dips = 0;
    for w in table.windows(2) {
        if w[0].n != w[1].n || w[0].modal_rank == w[1].modal_rank {
            continue;
        }
        changes += 1;
        if w[0].effective_accuracy().min(w[1].effective_accuracy()) < median {
            dips += 1;
        }
    }
    (changes, dips)
}

/// Extent of the low-accuracy region around the symmetric diagonal for one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipWidth {
    pub n: usize,
    /// `x_hi - x_lo` over the contiguous run of points below [`DIP_ACCURACY`]
    /// containing the grid point nearest the diagonal.
    pub width: f64,
    pub points: usize,
}

pub fn dip_widths(table: &[AxisRow], diagonal: f64) -> Vec<DipWidth> {
    let mut ns: Vec<usize> = table.iter().map(|r| r.n).collect();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let rows: Vec<&AxisRow> = table.iter().filter(|r| r.n == n).collect();
            let centre = (0..rows.len())
                .min_by(|&a, &b| (rows[a].x - diagonal).abs().total_cmp(&(rows[b].x - diagonal).abs()))
                .expect("non-empty grid");
            let low = |i: usize| rows[i].effective_accuracy() < DIP_ACCURACY;
            if !low(centre) {
                return DipWidth { n, width: 0.0, points: 0 };
            }
            let mut lo = centre;
            while lo > 0 && low(lo - 1) {
                lo -= 1;
            }
            let mut hi = centre;
            while hi + 1 < rows.len() && low(hi + 1) {
                hi += 1;
            }
            DipWidth { n, width: rows[hi].x - rows[lo].x, points: hi - lo + 1 }
        })
        .collect()
}

pub fn write_axis_csv(path: &Path, table: &[AxisRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "x", "mean_accuracy", "std_error", "modal_rank", "errors", "isolation_satisfied"])?;
    for r in table {
        w.write_record([
            r.n.to_string(),
            r.x.to_string(),
            if r.mean_accuracy.is_nan() { String::new() } else { r.mean_accuracy.to_string() },
            if r.std_error.is_nan() { String::new() } else { r.std_error.to_string() },
            r.modal_rank.map(|v| v.to_string()).unwrap_or_default(),
            r.errors.to_string(),
            r.isolation_satisfied.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_dips_csv(path: &Path, dips: &[DipWidth]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "width", "points"])?;
    for d in dips {
        w.write_record([d.n.to_string(), d.width.to_string(), d.points.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Everything a preset run produced.
#[derive(Debug, Clone)]
pub struct PresetRun {
    pub preset: Preset,
    pub config: SweepConfig,
    pub output: SweepOutput,
    pub axis: Option<Vec<AxisRow>>,
    pub dips: Option<Vec<DipWidth>>,
}

/// Lattice cutoff used for the isolation column of the `fig4` table.
pub const FIG4_ISOLATION_CUTOFF: i64 = 200;

/// Runs a preset and, when `out` is given, writes its tables there.
pub fn run_preset(preset: Preset, overrides: &PresetOverrides, out: Option<&Path>) -> Result<PresetRun> {
    let config = preset.config(overrides)?;
    let output = run_sweep(&config)?;
    let (axis, dips) = match preset.diagonal() {
        Some(diagonal) => {
            let cutoff = (preset == Preset::Fig4).then_some(FIG4_ISOLATION_CUTOFF);
            let table = axis_table(preset, &config, &output, cutoff)?;
            let dips = matches!(preset, Preset::WaxmanQ | Preset::WaxmanS).then(|| dip_widths(&table, diagonal));
            (Some(table), dips)
        }
        None => (None, None),
    };
    if let Some(dir) = out {
        let mut files = output.write_to(dir, &config)?;
        if let Some(t) = &axis {
            write_axis_csv(&dir.join("axis.csv"), t)?;
            files.push("axis.csv".into());
        }
        if let Some(d) = &dips {
            write_dips_csv(&dir.join("dips.csv"), d)?;
            files.push("dips.csv".into());
        }
        super::write_sidecar(&dir.join("run.toml"), &config, &files)?;
    }
    Ok(PresetRun { preset, config, output, axis, dips })
}

/// Samples one graph, decomposes it and matches its spectrum against the
/// truncated limiting measure. Writes `eigenvalues.csv`, `atoms.csv` and
/// `match.csv` when `out` is given.
pub fn spectrum_experiment(params: &SgbmParams, cutoff: i64, threshold: f64, window: f64, out: Option<&Path>) -> Result<MatchReport> {
    let sample = sample_graph(params)?;
    let spectrum = eigendecompose(&sample.graph)?;
    let measure = limiting_atoms(&params.f_in, &params.f_out, cutoff)?;
    let report = spectrum_match(&spectrum, &measure, threshold, window)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("eigenvalues.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["rank", "eigenvalue", "scaled"])?;
        let n = params.n as f64;
        for (i, &l) in spectrum.eigenvalues().iter().enumerate() {
            w.write_record([(i + 1).to_string(), l.to_string(), (l / n).to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        measure.write_csv(&dir.join("atoms.csv"))?;
        report.write_csv(&dir.join("match.csv"))?;
    }
    Ok(report)
}
