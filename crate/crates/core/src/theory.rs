//! The limiting spectrum of `A/n`, its moments, the isolation conditions of the
//! informative eigenvalue and numerical diagnostics comparing theory with
//! sampled spectra.
//!
//! As `n → ∞` the spectral measure `Σ_i δ_{λ_i/n}` converges to the atomic measure
//! with one atom at `(F̂_in(k) + F̂_out(k))/2` and one at `(F̂_in(k) - F̂_out(k))/2`
//! for every `k ∈ Z^d`. Everything here works with the truncation `|k_j| <= K`.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{fourier_coeff, KernelKind, KernelQuadrature, KernelSpec, LatticeIndex};
use crate::kernels::{DEFAULT_QUADRATURE_NODES, MAX_QUADRATURE_DIM};
use crate::model::{degree_stats, Graph, Labelling};
use crate::spectral::Spectrum;

/// Which of the two atom families an atom belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `(F̂_in + F̂_out)/2`, carried by vectors constant across communities.
    Sum,
    /// `(F̂_in - F̂_out)/2`, carried by vectors of opposite sign on the two communities.
    Difference,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Sum => "sum",
            Family::Difference => "difference",
        }
    }
}

/// One atom of the truncated limiting measure.
///
/// Kernels are radial in the ℓ∞ norm, so `F̂` is invariant under coordinate sign
/// changes and permutations. Lattice indices are grouped into these orbits and
/// `lattice_count` is the orbit size; summing counts over one family gives
/// `(2K + 1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub lattice_count: u64,
    pub family: Family,
    /// Representative index with `0 <= k_1 <= … <= k_d`.
    pub index: LatticeIndex,
}

/// The limiting measure truncated to `|k_j| <= cutoff`.
#[derive(Debug, Clone)]
pub struct LimitingMeasure {
    pub atoms: Vec<Atom>,
    pub cutoff: i64,
    /// `max |F̂_in(k)| + |F̂_out(k)|` over the shell `‖k‖∞ = cutoff`.
    pub tail_bound: f64,
}

impl LimitingMeasure {
    /// `Σ lattice_count · location^m` over both families.
    pub fn moment(&self, m: u32) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.lattice_count as f64 * a.location.powi(m as i32))
            .sum()
    }

    /// Atom locations in ascending order.
    pub fn sorted_locations(&self) -> Vec<f64> {
        let mut locs: Vec<f64> = self.atoms.iter().map(|a| a.location).collect();
        locs.sort_by(f64::total_cmp);
        locs
    }

    /// Atom of the given family at the canonical index.
    pub fn atom(&self, family: Family, index: &LatticeIndex) -> Option<&Atom> {
        self.atoms.iter().find(|a| a.family == family && &a.index == index)
    }

    /// CSV with columns `location,lattice_count,family`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["location", "lattice_count", "family"])?;
        for a in &self.atoms {
            w.write_record([a.location.to_string(), a.lattice_count.to_string(), a.family.as_str().to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Fourier coefficients of one kernel, tabulating the quadrature once if needed.
enum Coefficients {
    Analytic(KernelSpec),
    Tabulated(KernelQuadrature),
}

impl Coefficients {
    fn new(kernel: &KernelSpec) -> Result<Self> {
        Ok(match kernel.kind() {
            KernelKind::Waxman { .. } => {
                Coefficients::Tabulated(KernelQuadrature::new(kernel, DEFAULT_QUADRATURE_NODES)?)
            }
            _ => Coefficients::Analytic(*kernel),
        })
    }

    fn at(&self, k: &LatticeIndex) -> f64 {
        match self {
            Coefficients::Analytic(kernel) => fourier_coeff(kernel, k).expect("dimension checked"),
            Coefficients::Tabulated(table) => table.coeff(k),
        }
    }
}

fn check_pair(f_in: &KernelSpec, f_out: &KernelSpec) -> Result<usize> {
    let d = f_in.dim();
    if f_out.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f_out.dim() });
    }
    if d > MAX_QUADRATURE_DIM {
        return Err(Error::DimensionTooLarge { d, max: MAX_QUADRATURE_DIM });
    }
    Ok(d)
}

/// Non-decreasing tuples `0 <= k_1 <= … <= k_d <= cutoff`.
fn canonical_indices(dim: usize, cutoff: i64) -> Vec<LatticeIndex> {
    fn extend(prefix: &mut Vec<i64>, dim: usize, cutoff: i64, out: &mut Vec<LatticeIndex>) {
        if prefix.len() == dim {
            out.push(LatticeIndex(prefix.clone()));
            return;
        }
        let start = prefix.last().copied().unwrap_or(0);
        for k in start..=cutoff {
            prefix.push(k);
            extend(prefix, dim, cutoff, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(dim), dim, cutoff, &mut out);
    out
}

/// Number of lattice points obtained from a canonical index by signs and permutations.
fn orbit_size(k: &LatticeIndex) -> u64 {
    let d = k.dim() as u64;
    let factorial = |m: u64| (1..=m).product::<u64>().max(1);
    let mut perms = factorial(d);
    let mut i = 0;
    while i < k.0.len() {
        let run = k.0[i..].iter().take_while(|&&v| v == k.0[i]).count();
        perms /= factorial(run as u64);
        i += run;
    }
    perms << k.0.iter().filter(|&&v| v != 0).count()
}

/// Atoms of the limiting measure for `|k_j| <= cutoff`, plus the tail bound.
///
/// Waxman kernels cost one tensor contraction per orbit, so large cutoffs in
/// `d >= 2` are slow.
pub fn limiting_atoms(f_in: &KernelSpec, f_out: &KernelSpec, cutoff: i64) -> Result<LimitingMeasure> {
    let d = check_pair(f_in, f_out)?;
    if cutoff < 1 {
        return Err(Error::invalid(format!("lattice cutoff must be >= 1, got {cutoff}")));
    }
    let cin = Coefficients::new(f_in)?;
    let cout = Coefficients::new(f_out)?;
    let indices = canonical_indices(d, cutoff);
    let coeffs: Vec<(f64, f64)> = indices.par_iter().map(|k| (cin.at(k), cout.at(k))).collect();
    let mut atoms = Vec::with_capacity(2 * indices.len());
    let mut tail_bound = 0.0f64;
    for (k, &(a, b)) in indices.into_iter().zip(&coeffs) {
        if k.linf() == cutoff {
            tail_bound = tail_bound.max(a.abs() + b.abs());
        }
        let count = orbit_size(&k);
        atoms.push(Atom { location: (a + b) / 2.0, lattice_count: count, family: Family::Sum, index: k.clone() });
        atoms.push(Atom { location: (a - b) / 2.0, lattice_count: count, family: Family::Difference, index: k });
    }
    Ok(LimitingMeasure { atoms, cutoff, tail_bound })
}

/// `Σ_k ((F̂_in + F̂_out)(k)/2)^m + ((F̂_in - F̂_out)(k)/2)^m` over `|k_j| <= cutoff`.
pub fn limiting_moment(f_in: &KernelSpec, f_out: &KernelSpec, m: u32, cutoff: i64) -> Result<f64> {
    if m < 1 {
        return Err(Error::invalid("moment order must be >= 1"));
    }
    Ok(limiting_atoms(f_in, f_out, cutoff)?.moment(m))
}

/// `Σ_i (λ_i / n)^m = Tr A^m / n^m`.
pub fn empirical_moment(spectrum: &Spectrum, m: u32) -> f64 {
    let n = spectrum.n() as f64;
    spectrum.eigenvalues().iter().map(|&l| (l / n).powi(m as i32)).sum()
}

/// How well the informative eigenvalue is separated from the rest of the limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolationReport {
    /// `min_k |(F̂_in + F̂_out)(k) - (μ_in - μ_out)|`.
    pub min_gap_sum: f64,
    /// `min_{k ≠ 0} |(F̂_in - F̂_out)(k) - (μ_in - μ_out)|`.
    pub min_gap_diff: f64,
    /// Separation in units of `n` for `A`: `min(gap_sum/2, gap_diff/2, |μ_in - μ_out|/4)`.
    pub epsilon: f64,
    /// Truncation tail used to decide `satisfied`.
    pub tail_bound: f64,
    /// Both gaps exceed the tail bound.
    pub satisfied: bool,
}

/// Evaluates the two isolation conditions on the truncated lattice.
pub fn isolation_check(f_in: &KernelSpec, f_out: &KernelSpec, cutoff: i64) -> Result<IsolationReport> {
    let measure = limiting_atoms(f_in, f_out, cutoff)?;
    let zero = LatticeIndex::zero(f_in.dim());
    let mu_in = fourier_coeff(f_in, &zero)?;
    let mu_out = fourier_coeff(f_out, &zero)?;
    let delta_mu = match measure.atom(Family::Difference, &zero) {
        Some(a) => 2.0 * a.location,
        None => mu_in - mu_out,
    };
    if delta_mu.abs() <= 1e-14 * mu_in.abs().max(mu_out.abs()).max(1e-300) {
        return Err(Error::DegenerateModel(mu_in));
    }
    let mut min_gap_sum = f64::INFINITY;
    let mut min_gap_diff = f64::INFINITY;
    for a in &measure.atoms {
        let gap = (2.0 * a.location - delta_mu).abs();
        match a.family {
            Family::Sum => min_gap_sum = min_gap_sum.min(gap),
            Family::Difference if !a.index.is_zero() => min_gap_diff = min_gap_diff.min(gap),
            Family::Difference => {}
        }
    }
    let epsilon = (min_gap_sum / 2.0).min(min_gap_diff / 2.0).min(delta_mu.abs() / 4.0);
    let tail_bound = measure.tail_bound;
    Ok(IsolationReport {
        min_gap_sum,
        min_gap_diff,
        epsilon,
        tail_bound,
        satisfied: min_gap_sum > tail_bound && min_gap_diff > tail_bound,
    })
}

/// One eigenvalue of `A/n` outside the bulk and its nearest predicted atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchEntry {
    /// `λ_i / n`.
    pub eigenvalue: f64,
    pub nearest_atom: f64,
    pub distance: f64,
}

/// Comparison of the empirical spectrum with the limiting atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub threshold: f64,
    pub window: f64,
    pub entries: Vec<MatchEntry>,
    /// Largest entry distance, 0 when no eigenvalue leaves the bulk.
    pub max_distance: f64,
    /// Entries farther than `window` from every atom.
    pub outliers: usize,
}

impl MatchReport {
    /// CSV with columns `eigenvalue,nearest_atom,distance`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["eigenvalue", "nearest_atom", "distance"])?;
        for e in &self.entries {
            w.write_record([e.eigenvalue.to_string(), e.nearest_atom.to_string(), e.distance.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Matches every eigenvalue with `|λ_i/n| > threshold` to its nearest atom.
pub fn spectrum_match(spectrum: &Spectrum, measure: &LimitingMeasure, threshold: f64, window: f64) -> Result<MatchReport> {
    if !(threshold > 0.0) || !(window >= 0.0) {
        return Err(Error::invalid(format!("threshold must be > 0 and window >= 0, got {threshold} and {window}")));
    }
    let locs = measure.sorted_locations();
    if locs.is_empty() {
        return Err(Error::invalid("limiting measure has no atoms"));
    }
    let n = spectrum.n() as f64;
    let entries: Vec<MatchEntry> = spectrum
        .eigenvalues()
        .iter()
        .map(|&l| l / n)
        .filter(|x| x.abs() > threshold)
        .map(|x| {
            let pos = locs.partition_point(|&a| a < x);
            let nearest = [pos.checked_sub(1), Some(pos)]
                .into_iter()
                .flatten()
                .filter_map(|i| locs.get(i).copied())
                .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
                .expect("non-empty atoms");
            MatchEntry { eigenvalue: x, nearest_atom: nearest, distance: (nearest - x).abs() }
        })
        .collect();
    let max_distance = entries.iter().map(|e| e.distance).fold(0.0, f64::max);
    let outliers = entries.iter().filter(|e| e.distance > window).count();
    Ok(MatchReport { threshold, window, entries, max_distance, outliers })
}

/// Quantities of the Kahan–Parlett bound for a trial vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighReport {
    /// `vᵀAv / vᵀv`.
    pub rho: f64,
    /// `‖Av - ρv‖₂`.
    pub residual: f64,
    /// Distance from `ρ` to the nearest eigenvalue other than the closest one.
    pub delta: f64,
    /// `residual / (‖v‖₂ δ)`; infinite when `δ` vanishes.
    pub sine_bound: f64,
    /// `|sin ∠(v, u)|` for the eigenvector `u` closest to `ρ`.
    pub actual_sine: f64,
    /// 1-based rank of that eigenvector.
    pub closest_rank: usize,
}

impl RayleighReport {
    pub fn is_bounded(&self) -> bool {
        self.sine_bound.is_finite()
    }

    /// The bound, or an error when `ρ` sits on a repeated eigenvalue.
    pub fn bounded(&self) -> Result<f64> {
        if self.is_bounded() {
            Ok(self.sine_bound)
        } else {
            Err(Error::Unbounded(format!("zero spectral gap at rho = {}", self.rho)))
        }
    }
}

/// `|sin ∠(v, u)|` for unit `u`.
pub fn sine_between(v: &[f64], unit: &[f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let c: f64 = v.iter().zip(unit).map(|(a, b)| a * b).sum::<f64>() / norm;
    let rest: f64 = v.iter().zip(unit).map(|(a, b)| (a / norm - c * b).powi(2)).sum();
    rest.sqrt().min(1.0)
}

/// Kahan–Parlett bound `|sin ∠(v, ṽ)| <= ‖Av - ρv‖ / (‖v‖ δ)` for a trial vector.
///
/// `δ` comes from the supplied spectrum. Gaps below `1e-9` times the spectral
/// radius count as zero, which makes the bound infinite.
pub fn rayleigh_bound(graph: &Graph, v: &[f64], spectrum: &Spectrum) -> Result<RayleighReport> {
    let n = graph.n();
    if v.len() != n || spectrum.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: if v.len() != n { v.len() } else { spectrum.n() } });
    }
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    if !(norm2 > 0.0) {
        return Err(Error::invalid("trial vector must be nonzero"));
    }
    let av = graph.matvec(v);
    let rho = av.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / norm2;
    let residual = av.iter().zip(v).map(|(a, b)| (a - rho * b).powi(2)).sum::<f64>().sqrt();
    let values = spectrum.eigenvalues();
    let closest = (0..n)
        .min_by(|&a, &b| (values[a] - rho).abs().total_cmp(&(values[b] - rho).abs()))
        .expect("n >= 1");
    let delta = (0..n)
        .filter(|&i| i != closest)
        .map(|i| (values[i] - rho).abs())
        .fold(f64::INFINITY, f64::min);
    let radius = values.iter().map(|l| l.abs()).fold(1.0, f64::max);
    let sine_bound = if delta > 1e-9 * radius { residual / (norm2.sqrt() * delta) } else { f64::INFINITY };
    Ok(RayleighReport {
        rho,
        residual,
        delta,
        sine_bound,
        actual_sine: sine_between(v, spectrum.eigenvector(closest + 1)),
        closest_rank: closest + 1,
    })
}

/// Largest node count for which traces are computed by exact integer powering.
pub const EXACT_TRACE_MAX_N: usize = 64;

/// `Tr A^m`, exact for `n <= 64`, from the eigenvalues otherwise.
pub fn trace_power(graph: &Graph, m: u32) -> Result<f64> {
    let n = graph.n();
    if m == 0 {
        return Ok(n as f64);
    }
    if n > EXACT_TRACE_MAX_N {
        let s = crate::spectral::eigendecompose(graph)?;
        return Ok(s.eigenvalues().iter().map(|l| l.powi(m as i32)).sum());
    }
    let a: Vec<i128> = graph.to_dense().into_iter().map(|x| x as i128).collect();
    let mut p = a.clone();
    for _ in 1..m {
        let mut next = vec![0i128; n * n];
        for i in 0..n {
            for k in 0..n {
                let pik = p[i * n + k];
                if pik == 0 {
                    continue;
                }
                for j in graph.neighbors(k) {
                    next[i * n + j] += pik;
                }
            }
        }
        p = next;
    }
    Ok((0..n).map(|i| p[i * n + i]).sum::<i128>() as f64)
}

/// `(|Tr A^m - Tr B^m|, m n^{m-2} d_Ham(A, B))` with `d_Ham` over ordered pairs.
pub fn trace_lipschitz_check(a: &Graph, b: &Graph, m: u32) -> Result<(f64, f64)> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: b.n() });
    }
    if m < 1 {
        return Err(Error::invalid("power must be >= 1"));
    }
    let n = a.n() as f64;
    let lhs = (trace_power(a, m)? - trace_power(b, m)?).abs();
    let rhs = m as f64 * n.powi(m as i32 - 2) * a.hamming(b)? as f64;
    Ok((lhs, rhs))
}

/// `sqrt(2 (μ_in + μ_out) n ln n)`, the margin every node should clear.
pub fn degree_margin_threshold(mu_in: f64, mu_out: f64, n: usize) -> f64 {
    let n = n as f64;
    (2.0 * (mu_in + mu_out) * n * n.ln()).sqrt()
}

/// Per-graph summary of the intra/inter degree concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationReport {
    pub threshold: f64,
    /// `min_i z_in(i) - z_out(i)`.
    pub min_margin: i64,
    /// Nodes with `z_in - z_out < threshold`.
    pub violations: usize,
}

impl ConcentrationReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

pub fn degree_concentration(graph: &Graph, labels: &Labelling, mu_in: f64, mu_out: f64) -> Result<ConcentrationReport> {
    let stats = degree_stats(graph, labels)?;
    let threshold = degree_margin_threshold(mu_in, mu_out, graph.n());
    let margins: Vec<i64> = stats.margins().collect();
    Ok(ConcentrationReport {
        threshold,
        min_margin: margins.iter().copied().min().unwrap_or(0),
        violations: margins.iter().filter(|&&z| (z as f64) < threshold).count(),
    })
}
