//! Eigendecomposition of the adjacency matrix, selection of the eigenpair
//! nearest the ideal eigenvalue `n(μ_in - μ_out)/2`, sign partitioning, local
//! improvement and the permutation-invariant loss.

use std::io::Write;
use std::path::Path;

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::model::{Graph, Labelling};

/// Full eigendecomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    eigenvalues: Vec<f64>,
    /// Eigenvector of rank `r` (1-based) occupies `vectors[(r-1)*n .. r*n]`.
    vectors: Vec<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalue of the given 1-based rank.
    pub fn eigenvalue(&self, rank: usize) -> f64 {
        self.eigenvalues[rank - 1]
    }

    /// Unit eigenvector of the given 1-based rank.
    pub fn eigenvector(&self, rank: usize) -> &[f64] {
        &self.vectors[(rank - 1) * self.n..rank * self.n]
    }

    /// `max_i ‖A v_i - λ_i v_i‖₂`.
    pub fn max_residual(&self, graph: &Graph) -> f64 {
        (1..=self.n)
            .map(|r| {
                let v = self.eigenvector(r);
                let lambda = self.eigenvalue(r);
                graph
                    .matvec(v)
                    .iter()
                    .zip(v)
                    .map(|(av, x)| (av - lambda * x).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max_{i,j} |⟨v_i, v_j⟩ - δ_ij|`.
    pub fn max_orthogonality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 1..=self.n {
            for b in a..=self.n {
                let dot: f64 = self.eigenvector(a).iter().zip(self.eigenvector(b)).map(|(x, y)| x * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Dense symmetric eigendecomposition of `A`.
pub fn eigendecompose(graph: &Graph) -> Result<Spectrum> {
    let n = graph.n();
    if n < 2 {
        return Err(Error::invalid(format!("eigendecomposition needs n >= 2, got {n}")));
    }
    let mut a = Mat::<f64>::zeros(n, n);
    for (i, j) in graph.edges() {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    drop(a);
    let s = evd.S();
    let u = evd.U();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    // faer sorts ascending
    for col in (0..n).rev() {
        let lambda = s[col];
        if !lambda.is_finite() {
            return Err(Error::Decomposition(format!("non-finite eigenvalue at column {col}")));
        }
        eigenvalues.push(lambda);
        vectors.extend((0..n).map(|row| u[(row, col)]));
    }
    Ok(Spectrum { n, eigenvalues, vectors })
}

/// `λ* = n (μ_in - μ_out) / 2`.
pub fn ideal_eigenvalue(mu_in: f64, mu_out: f64, n: usize) -> Result<f64> {
    if (mu_in - mu_out).abs() <= 1e-14 * mu_in.abs().max(mu_out.abs()).max(1e-300) {
        return Err(Error::DegenerateModel(mu_in));
    }
    Ok(n as f64 * (mu_in - mu_out) / 2.0)
}

/// The eigenpair chosen for partitioning and how well it is separated.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub lambda_star: f64,
    /// 1-based rank in descending order.
    pub selected_index: usize,
    pub lambda_selected: f64,
    /// Distance from the selected eigenvalue to the nearest other eigenvalue.
    pub gap_to_next: f64,
    pub eigenvector: Vec<f64>,
}

/// Eigenpair minimising `|λ_i - λ*|`; an exact tie goes to the larger eigenvalue.
pub fn select_eigenpair(spectrum: &Spectrum, lambda_star: f64) -> SelectionReport {
    let values = spectrum.eigenvalues();
    let mut best = 0;
    for (i, &l) in values.iter().enumerate().skip(1) {
        // descending order, so keeping the first minimiser favours the larger eigenvalue
        if (l - lambda_star).abs() < (values[best] - lambda_star).abs() {
            best = i;
        }
    }
    let chosen = values[best];
    let gap_to_next = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &l)| (l - chosen).abs())
        .fold(f64::INFINITY, f64::min);
    SelectionReport {
        lambda_star,
        selected_index: best + 1,
        lambda_selected: chosen,
        gap_to_next: if gap_to_next.is_finite() { gap_to_next } else { 0.0 },
        eigenvector: spectrum.eigenvector(best + 1).to_vec(),
    }
}

/// Label 1 where the entry is positive, 2 otherwise (zeros included).
pub fn sign_partition(eigenvector: &[f64]) -> Labelling {
    Labelling::new(eigenvector.iter().map(|&x| if x > 0.0 { 1 } else { 2 }).collect())
        .expect("labels are 1 or 2 by construction")
}

/// Higher-order spectral clustering.
pub fn hosc(graph: &Graph, mu_in: f64, mu_out: f64) -> Result<(Labelling, SelectionReport)> {
    let lambda_star = ideal_eigenvalue(mu_in, mu_out, graph.n())?;
    let spectrum = eigendecompose(graph)?;
    Ok(hosc_from_spectrum(&spectrum, lambda_star))
}

/// The selection and partition steps of [`hosc`] on an existing decomposition.
pub fn hosc_from_spectrum(spectrum: &Spectrum, lambda_star: f64) -> (Labelling, SelectionReport) {
    let report = select_eigenpair(spectrum, lambda_star);
    (sign_partition(&report.eigenvector), report)
}

/// Partition by the second-largest eigenvector of `A`.
pub fn fiedler_partition(spectrum: &Spectrum) -> Labelling {
    sign_partition(spectrum.eigenvector(2))
}

/// One synchronous majority pass: every node takes the label held by most of its
/// neighbours under `labels`; ties keep the incoming label.
pub fn local_improvement(graph: &Graph, labels: &Labelling) -> Result<Labelling> {
    if labels.len() != graph.n() {
        return Err(Error::LengthMismatch { expected: graph.n(), got: labels.len() });
    }
    let l = labels.as_slice();
    let out = (0..graph.n())
        .map(|i| {
            let ones = graph.neighbors(i).filter(|&j| l[j] == 1).count();
            let twos = graph.degree(i) - ones;
            match ones.cmp(&twos) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => 2,
                std::cmp::Ordering::Equal => l[i],
            }
        })
        .collect();
    Labelling::new(out)
}

/// Repeats [`local_improvement`] until a fixed point or `max_passes` passes.
pub fn iterated_local_improvement(graph: &Graph, labels: &Labelling, max_passes: usize) -> Result<Labelling> {
    let mut current = labels.clone();
    for _ in 0..max_passes {
        let next = local_improvement(graph, &current)?;
        if next == current {
            break;
        }
        current = next;
    }
    Ok(current)
}

/// HOSC followed by one local-improvement pass.
pub fn hosc_li(graph: &Graph, mu_in: f64, mu_out: f64) -> Result<(Labelling, SelectionReport)> {
    let (labels, report) = hosc(graph, mu_in, mu_out)?;
    Ok((local_improvement(graph, &labels)?, report))
}

/// Fraction of misclassified nodes, minimised over the two label permutations.
pub fn loss(truth: &Labelling, predicted: &Labelling) -> Result<f64> {
    let errors = misclassified(truth, predicted)?;
    Ok(errors as f64 / truth.len().max(1) as f64)
}

/// `1 - loss`.
pub fn accuracy(truth: &Labelling, predicted: &Labelling) -> Result<f64> {
    Ok(1.0 - loss(truth, predicted)?)
}

/// Number of misclassified nodes under the best label permutation.
pub fn misclassified(truth: &Labelling, predicted: &Labelling) -> Result<usize> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), got: predicted.len() });
    }
    let mismatches = truth
        .as_slice()
        .iter()
        .zip(predicted.as_slice())
        .filter(|(a, b)| a != b)
        .count();
    Ok(mismatches.min(truth.len() - mismatches))
}

/// One row of the per-eigenvector accuracy profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub rank: usize,
    pub eigenvalue: f64,
    pub accuracy: f64,
}

/// Accuracy of the sign partition of every eigenvector.
pub fn per_eigenvector_accuracy(spectrum: &Spectrum, truth: &Labelling) -> Result<Vec<ProfileRow>> {
    if truth.len() != spectrum.n() {
        return Err(Error::LengthMismatch { expected: spectrum.n(), got: truth.len() });
    }
    (1..=spectrum.n())
        .map(|rank| {
            Ok(ProfileRow {
                rank,
                eigenvalue: spectrum.eigenvalue(rank),
                accuracy: accuracy(truth, &sign_partition(spectrum.eigenvector(rank)))?,
            })
        })
        .collect()
}

/// CSV with columns `rank,eigenvalue,accuracy,selected`.
pub fn write_profile_csv(path: &Path, rows: &[ProfileRow], selected_rank: Option<usize>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rank", "eigenvalue", "accuracy", "selected"])?;
    for r in rows {
        let selected = u8::from(Some(r.rank) == selected_rank);
        w.write_record([
            r.rank.to_string(),
            r.eigenvalue.to_string(),
            r.accuracy.to_string(),
            selected.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Same columns for a single selection; accuracy is empty when the truth is unknown.
pub fn write_selection_csv(path: &Path, report: &SelectionReport, accuracy: Option<f64>) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let acc = accuracy.map(|a| a.to_string()).unwrap_or_default();
    writeln!(
        file,
        "rank,eigenvalue,accuracy,selected,lambda_star,gap_to_next\n{},{},{},1,{},{}",
        report.selected_index, report.lambda_selected, acc, report.lambda_star, report.gap_to_next
    )
    .map_err(|e| Error::io(path, e))
}
