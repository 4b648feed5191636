//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed validation, 2 configuration or input error,
//! 3 degenerate model (`μ_in = μ_out`), 4 numerical failure.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{Config, DEFAULT_CUTOFF, DEFAULT_THRESHOLD, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::harness::presets::run_preset;
use crate::harness::{summarize, Algorithm};
use crate::model::io::{read_edge_list, read_labelling, write_edge_list, write_labelling, write_positions};
use crate::model::sample_graph;
use crate::spectral::{accuracy, hosc, hosc_li, ideal_eigenvalue, write_selection_csv};
use crate::validate::{run_validation, write_validation_csv};

#[derive(Debug, Parser)]
#[command(name = "hosc", version, about = "Higher-order spectral clustering on soft geometric block models")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides run.out).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed override for the model or the sweep master seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Suppress progress and report output.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample a graph and write its edge list, labels and positions.
    Generate,
    /// Cluster a sampled or given graph with hosc or hosc_li.
    Cluster,
    /// Compare an empirical spectrum against the limiting atoms.
    Spectrum,
    /// Run an experiment preset.
    Sweep,
    /// Run the property-oracle suite.
    Validate,
}

/// What a successful invocation reports back to `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    ValidationFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::ValidationFailed => 1,
        }
    }
}

struct Printer {
    quiet: bool,
}

impl Printer {
    fn line(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn load(cli: &Cli) -> Result<Config> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    Config::from_path(path)
}

fn create(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let out = Printer { quiet: cli.quiet };
    match cli.command {
        Command::Generate => generate(cli, &out),
        Command::Cluster => cluster(cli, &out),
        Command::Spectrum => spectrum(cli, &out),
        Command::Sweep => sweep(cli, &out),
        Command::Validate => validate(cli, &out),
    }
}

fn generate(cli: &Cli, out: &Printer) -> Result<Outcome> {
    let config = load(cli)?;
    let params = config.params(cli.seed)?;
    let (mu_in, mu_out) = params.densities()?;
    ideal_eigenvalue(mu_in, mu_out, params.n)?;
    let dir = config.out_dir(cli.out.as_deref());
    let sample = sample_graph(&params)?;
    create(&dir)?;
    write_edge_list(&dir.join("graph.edges"), &sample.graph, params.d, params.seed)?;
    write_labelling(&dir.join("labels.txt"), &sample.labels)?;
    write_positions(&dir.join("positions.csv"), &sample.positions)?;
    out.line(format!(
        "wrote {} nodes, {} edges to {}",
        params.n,
        sample.graph.edge_count(),
        dir.display()
    ));
    Ok(Outcome::Ok)
}

fn cluster(cli: &Cli, out: &Printer) -> Result<Outcome> {
    let config = load(cli)?;
    let algorithm: Algorithm = config.run.algorithm.as_deref().unwrap_or("hosc").parse()?;
    if !matches!(algorithm, Algorithm::Hosc | Algorithm::HoscLi) {
        return Err(Error::Config(format!("cluster supports hosc and hosc_li, got {algorithm}")));
    }
    let (graph, mut truth) = match &config.run.graph {
        Some(p) => (read_edge_list(&config.resolve(p))?.0, None),
        None => {
            let sample = sample_graph(&config.params(cli.seed)?)?;
            (sample.graph, Some(sample.labels))
        }
    };
    if let Some(p) = &config.run.labels {
        truth = Some(read_labelling(&config.resolve(p))?);
    }
    let (mu_in, mu_out) = config.densities()?;
    let (labels, report) = match algorithm {
        Algorithm::Hosc => hosc(&graph, mu_in, mu_out)?,
        _ => hosc_li(&graph, mu_in, mu_out)?,
    };
    let acc = truth.as_ref().map(|t| accuracy(t, &labels)).transpose()?;
    let dir = config.out_dir(cli.out.as_deref());
    create(&dir)?;
    write_labelling(&dir.join("predicted.txt"), &labels)?;
    write_selection_csv(&dir.join("selection.csv"), &report, acc)?;
    out.line(format!(
        "{algorithm}: selected rank {} (eigenvalue {:.4}, lambda* {:.4}, gap {:.4})",
        report.selected_index, report.lambda_selected, report.lambda_star, report.gap_to_next
    ));
    if let Some(a) = acc {
        out.line(format!("accuracy {a:.6}"));
    }
    Ok(Outcome::Ok)
}

fn spectrum(cli: &Cli, out: &Printer) -> Result<Outcome> {
    let config = load(cli)?;
    let params = config.params(cli.seed)?;
    let cutoff = config.run.cutoff.unwrap_or(DEFAULT_CUTOFF);
    let threshold = config.run.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let window = config.run.window.unwrap_or(DEFAULT_WINDOW);
    let dir = config.out_dir(cli.out.as_deref());
    let report = crate::harness::presets::spectrum_experiment(&params, cutoff, threshold, window, Some(&dir))
        .map_err(|e| match e {
            Error::InvalidParameter(msg) => Error::Config(msg),
            other => other,
        })?;
    out.line(format!(
        "{} eigenvalues of A/n beyond {threshold}; max distance to an atom {:.4}; {} outside window {window}",
        report.entries.len(),
        report.max_distance,
        report.outliers
    ));
    for e in report.entries.iter().take(10) {
        out.line(format!("  {:>9.5} -> atom {:>9.5} (distance {:.5})", e.eigenvalue, e.nearest_atom, e.distance));
    }
    Ok(Outcome::Ok)
}

fn sweep(cli: &Cli, out: &Printer) -> Result<Outcome> {
    let config = load(cli)?;
    let (preset, overrides) = config.preset(cli.seed)?;
    let dir = config.out_dir(cli.out.as_deref());
    let run = run_preset(preset, &overrides, Some(&dir))?;
    out.line(format!("{preset}: {} rows written to {}", run.output.rows.len(), dir.display()));
    for s in summarize(&run.output.rows) {
        out.line(format!(
            "  n={:<5} {} vs {} {:<14} accuracy {:.4} ± {:.4} rank {} errors {}",
            s.n,
            s.kernel_in,
            s.kernel_out,
            s.algorithm.as_str(),
            s.mean_accuracy,
            s.std_error,
            s.modal_rank.map(|r| r.to_string()).unwrap_or_else(|| "-".into()),
            s.errors
        ));
    }
    Ok(Outcome::Ok)
}

fn validate(cli: &Cli, out: &Printer) -> Result<Outcome> {
    let config = cli.config.as_ref().map(|p| Config::from_path(p)).transpose()?;
    let seed = cli.seed.or(config.as_ref().and_then(|c| c.model.as_ref().map(|m| m.seed))).unwrap_or(0);
    let results = run_validation(seed);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &results {
        out.line(format!("{:<width$}  {}  {}", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail));
    }
    let dir = match (&cli.out, &config) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(c)) if c.run.out.is_some() => Some(c.out_dir(None)),
        _ => None,
    };
    if let Some(dir) = dir {
        create(&dir)?;
        write_validation_csv(&dir.join("validation.csv"), &results)?;
    }
    Ok(if results.iter().all(|r| r.passed) { Outcome::Ok } else { Outcome::ValidationFailed })
}
