//! Radial connectivity probability functions on the flat torus and their
//! Fourier coefficients.
//!
//! A kernel `F` maps a torus displacement `x` to an edge probability that depends
//! only on `‖x‖∞`. Three families are supported: constant (stochastic block
//! model), indicator of an ℓ∞ ball (geometric block model) and the clipped
//! exponential `min(1, q e^{-s‖x‖})` (Waxman block model).
//!
//! Fourier coefficients `F̂(k) = ∫ F(x) e^{-2iπ⟨k,x⟩} dx` are real because every
//! kernel is even in each coordinate separately. Constant and indicator kernels
//! have closed forms; the Waxman family goes through tensor Gauss–Legendre
//! quadrature.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{sorted_breaks, GaussLegendre};
use crate::torus::{linf, TorusVector};

/// Largest dimension accepted by the quadrature routines; cost grows as `nodes^d`.
pub const MAX_QUADRATURE_DIM: usize = 3;

/// Gauss–Legendre nodes per panel and dimension used for Waxman coefficients.
pub const DEFAULT_QUADRATURE_NODES: usize = 256;

/// Which family a kernel belongs to, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Constant { p: f64 },
    Indicator { r: f64 },
    Waxman { q: f64, s: f64 },
}

/// A radial connectivity probability function on `T^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    dim: usize,
}

impl KernelSpec {
    pub fn constant(p: f64, dim: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("constant kernel needs p in [0, 1], got {p}")));
        }
        Self::with_dim(KernelKind::Constant { p }, dim)
    }

    pub fn indicator(r: f64, dim: usize) -> Result<Self> {
        if !(r > 0.0 && r < 0.5) {
            return Err(Error::invalid(format!("indicator kernel needs 0 < r < 1/2, got r = {r}")));
        }
        Self::with_dim(KernelKind::Indicator { r }, dim)
    }

    pub fn waxman(q: f64, s: f64, dim: usize) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::invalid(format!("waxman kernel needs q > 0, got q = {q}")));
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("waxman kernel needs s >= 0, got s = {s}")));
        }
        Self::with_dim(KernelKind::Waxman { q, s }, dim)
    }

    fn with_dim(kind: KernelKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("kernel dimension must be positive"));
        }
        Ok(KernelSpec { kind, dim })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same kernel in another dimension.
    pub fn in_dim(&self, dim: usize) -> Result<Self> {
        Self::with_dim(self.kind, dim)
    }

    /// `F` as a function of the norm `t = ‖x‖∞ ∈ [0, 1/2]`.
    #[inline]
    pub fn profile(&self, t: f64) -> f64 {
        match self.kind {
            KernelKind::Constant { p } => p,
            KernelKind::Indicator { r } => {
                if t <= r {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::Waxman { q, s } => (q * (-s * t).exp()).min(1.0),
        }
    }

    /// Points in `(0, 1/2)` where the profile is not smooth. The origin is a kink
    /// of every non-constant profile and is handled by integrating over `[0, 1/2]`.
    pub fn profile_breakpoints(&self) -> Vec<f64> {
        match self.kind {
            KernelKind::Constant { .. } => vec![],
            KernelKind::Indicator { r } => vec![r],
            KernelKind::Waxman { q, s } => {
                if q > 1.0 && s > 0.0 {
                    let t0 = q.ln() / s;
                    if t0 < 0.5 {
                        return vec![t0];
                    }
                }
                vec![]
            }
        }
    }

    /// Short human-readable label, also used in result tables.
    pub fn label(&self) -> String {
        match self.kind {
            KernelKind::Constant { p } => format!("constant(p={p})"),
            KernelKind::Indicator { r } => format!("indicator(r={r})"),
            KernelKind::Waxman { q, s } => format!("waxman(q={q};s={s})"),
        }
    }
}

/// An integer lattice index `k ∈ Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeIndex(pub Vec<i64>);

impl LatticeIndex {
    pub fn zero(dim: usize) -> Self {
        LatticeIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn linf(&self) -> i64 {
        self.0.iter().map(|k| k.abs()).max().unwrap_or(0)
    }

    /// All indices with `|k_j| <= cutoff`, in lexicographic order.
    pub fn cube(dim: usize, cutoff: i64) -> impl Iterator<Item = LatticeIndex> {
        let side = (2 * cutoff + 1) as usize;
        let total = side.pow(dim as u32);
        (0..total).map(move |mut code| {
            let mut k = vec![0i64; dim];
            for slot in k.iter_mut().rev() {
                *slot = (code % side) as i64 - cutoff;
                code /= side;
            }
            LatticeIndex(k)
        })
    }
}

impl From<Vec<i64>> for LatticeIndex {
    fn from(v: Vec<i64>) -> Self {
        LatticeIndex(v)
    }
}

/// `F(displacement)`; always in `[0, 1]`.
pub fn eval_kernel(kernel: &KernelSpec, displacement: &TorusVector) -> Result<f64> {
    if displacement.dim() != kernel.dim {
        return Err(Error::DimensionMismatch { expected: kernel.dim, got: displacement.dim() });
    }
    Ok(kernel.profile(displacement.norm()))
}

/// `sin(x) / x` with the removable singularity filled in.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `F̂(k)`. Closed forms for constant and indicator kernels, quadrature otherwise.
///
/// The indicator coefficient is `(2r)^d ∏_j sinc(2π k_j r)`: each axis contributes
/// `∫_{-r}^{r} e^{-2iπ k_j x} dx = 2r sinc(2π k_j r)`.
pub fn fourier_coeff(kernel: &KernelSpec, k: &LatticeIndex) -> Result<f64> {
    check_index(kernel, k)?;
    match kernel.kind {
        KernelKind::Constant { p } => Ok(if k.is_zero() { p } else { 0.0 }),
        KernelKind::Indicator { r } => Ok(k
            .0
            .iter()
            .map(|&kj| 2.0 * r * sinc(2.0 * PI * kj as f64 * r))
            .product()),
        KernelKind::Waxman { .. } => {
            fourier_coeff_quadrature(kernel, k, DEFAULT_QUADRATURE_NODES)
        }
    }
}

/// Numerical `F̂(k)` by direct integration of `F(x) cos(2π⟨k,x⟩)`.
///
/// `nodes_per_dim` is the Gauss–Legendre order on each smooth panel of each axis.
/// See [`KernelQuadrature`] for the panel layout.
pub fn fourier_coeff_quadrature(
    kernel: &KernelSpec,
    k: &LatticeIndex,
    nodes_per_dim: usize,
) -> Result<f64> {
    check_index(kernel, k)?;
    Ok(KernelQuadrature::new(kernel, nodes_per_dim)?.coeff(k))
}

/// `μ = F̂(0)`, the average edge probability.
pub fn edge_density(kernel: &KernelSpec) -> Result<f64> {
    fourier_coeff(kernel, &LatticeIndex::zero(kernel.dim))
}

fn check_index(kernel: &KernelSpec, k: &LatticeIndex) -> Result<()> {
    if k.dim() != kernel.dim {
        return Err(Error::DimensionMismatch { expected: kernel.dim, got: k.dim() });
    }
    Ok(())
}

/// A tabulated tensor quadrature for one kernel, reusable across many `k`.
///
/// Evenness in every coordinate reduces the integral to `2^d` times the integral
/// over `[0, 1/2]^d` against `∏_j cos(2π k_j x_j)`. Each axis is split at the
/// profile breakpoints so that indicator kernels integrate a smooth function on
/// every panel. Waxman kernels in `d >= 2` still have the diagonal kinks of the
/// ℓ∞ norm inside panels and converge algebraically there.
#[derive(Debug, Clone)]
pub struct KernelQuadrature {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl KernelQuadrature {
    pub fn new(kernel: &KernelSpec, nodes_per_dim: usize) -> Result<Self> {
        let dim = kernel.dim;
        if dim > MAX_QUADRATURE_DIM {
            return Err(Error::DimensionTooLarge { d: dim, max: MAX_QUADRATURE_DIM });
        }
        if nodes_per_dim < 16 {
            return Err(Error::invalid(format!(
                "quadrature needs at least 16 nodes per dimension, got {nodes_per_dim}"
            )));
        }
        let gl = GaussLegendre::new(nodes_per_dim);
        let breaks = sorted_breaks(0.0, 0.5, kernel.profile_breakpoints());
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            for (x, wt) in gl.mapped(w[0], w[1]) {
                nodes.push(x);
                weights.push(wt);
            }
        }
        let m = nodes.len();
        let total = m.pow(dim as u32);
        let mut values = Vec::with_capacity(total);
        let mut point = vec![0.0; dim];
        for code in 0..total {
            let mut c = code;
            for slot in point.iter_mut().rev() {
                *slot = nodes[c % m];
                c /= m;
            }
            values.push(kernel.profile(linf(&point)));
        }
        Ok(KernelQuadrature { dim, nodes, weights, values })
    }

    pub fn coeff(&self, k: &LatticeIndex) -> f64 {
        debug_assert_eq!(k.dim(), self.dim);
        let m = self.nodes.len();
        // contract the last axis repeatedly
        let mut acc = self.values.clone();
        for &kj in k.0.iter().rev() {
            let factors: Vec<f64> = self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| 2.0 * w * (2.0 * PI * kj as f64 * x).cos())
                .collect();
            acc = acc
                .chunks_exact(m)
                .map(|row| row.iter().zip(&factors).map(|(v, f)| v * f).sum())
                .collect();
        }
        acc[0]
    }
}

/// `(F_1 * F_2 * … * F_m)(0)` on `T^1`, evaluated without Fourier series.
///
/// The first convolution `F_1 * F_2` is tabulated on a uniform periodic grid of
/// `grid_points_per_dim` points by piecewise Gauss–Legendre integration split at
/// every jump or kink of both factors, so it is exact up to rounding for
/// constant and indicator kernels. Each further convolution integrates the
/// piecewise-linear (trapezoidal) interpolant of the running result against the
/// next kernel, again splitting at the kernel's breakpoints, which keeps the error
/// second order in the grid spacing. Only the last convolution is evaluated
/// at the origin alone.
pub fn convolution_at_zero(kernels: &[KernelSpec], grid_points_per_dim: usize) -> Result<f64> {
    if kernels.len() < 2 {
        return Err(Error::invalid(format!(
            "convolution needs at least two kernels, got {}",
            kernels.len()
        )));
    }
    if let Some(bad) = kernels.iter().find(|k| k.dim != 1) {
        return Err(Error::DimensionMismatch { expected: 1, got: bad.dim });
    }
    let n = grid_points_per_dim;
    if n < 16 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!("convolution grid must be even and >= 16, got {n}")));
    }
    let smooth = GaussLegendre::new(16);
    let linear = GaussLegendre::new(3);
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / n as f64 - 0.5).collect();

    let f1 = &kernels[0];
    let f2 = &kernels[1];
    if kernels.len() == 2 {
        return Ok(kernel_pair_at(f1, f2, 0.0, &smooth));
    }

    let mut table: Vec<f64> = grid.iter().map(|&y| kernel_pair_at(f1, f2, y, &smooth)).collect();
    let rest = &kernels[2..];
    for (idx, kernel) in rest.iter().enumerate() {
        let last = idx + 1 == rest.len();
        // grid points plus the kernel's own breakpoints on [-1/2, 1/2]
        let breaks = sorted_breaks(
            -0.5,
            0.5,
            grid.iter().copied().chain(kernel_breakpoints_1d(kernel)),
        );
        let step = |y: f64| {
            linear.integrate_pieces(&breaks, |x| {
                interpolate_periodic(&table, y - x) * kernel.profile(x.abs())
            })
        };
        if last {
            return Ok(step(0.0));
        }
        table = grid.iter().map(|&y| step(y)).collect();
    }
    unreachable!("the loop returns on the last kernel")
}

/// Jumps and kinks of `x ↦ F(|x|)` on `(-1/2, 1/2)`.
fn kernel_breakpoints_1d(kernel: &KernelSpec) -> Vec<f64> {
    let mut out = vec![0.0];
    for b in kernel.profile_breakpoints() {
        out.push(b);
        out.push(-b);
    }
    out
}

/// `(F_1 * F_2)(y) = ∫ F_1(y - x) F_2(x) dx` with both factors' breakpoints respected.
fn kernel_pair_at(f1: &KernelSpec, f2: &KernelSpec, y: f64, gl: &GaussLegendre) -> f64 {
    let shifted = kernel_breakpoints_1d(f1)
        .into_iter()
        .chain(std::iter::once(0.5))
        .map(|b| crate::torus::wrap(y - b));
    let breaks = sorted_breaks(-0.5, 0.5, kernel_breakpoints_1d(f2).into_iter().chain(shifted));
    gl.integrate_pieces(&breaks, |x| {
        f1.profile(crate::torus::wrap(y - x).abs()) * f2.profile(x.abs())
    })
}

/// Linear interpolation of a periodic table sampled at `i/n - 1/2`.
fn interpolate_periodic(table: &[f64], z: f64) -> f64 {
    let n = table.len();
    let t = (crate::torus::wrap(z) + 0.5) * n as f64;
    let i = (t.floor() as usize).min(n - 1);
    let frac = t - i as f64;
    table[i] * (1.0 - frac) + table[(i + 1) % n] * frac
}

/// Serialized kernel block: `kind` plus only the keys that kind uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

impl KernelConfig {
    pub fn into_kernel(&self, dim: usize) -> Result<KernelSpec> {
        let present = |name: &str, v: Option<f64>| v.map(|_| name.to_string());
        let keys: Vec<String> = [
            present("p", self.p),
            present("r", self.r),
            present("q", self.q),
            present("s", self.s),
        ]
        .into_iter()
        .flatten()
        .collect();
        let allowed: &[&str] = match self.kind.as_str() {
            "constant" => &["p"],
            "indicator" => &["r"],
            "waxman" => &["q", "s"],
            other => {
                return Err(Error::Config(format!(
                    "unknown kernel kind {other:?} (expected constant, indicator or waxman)"
                )))
            }
        };
        if let Some(extra) = keys.iter().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "key {extra:?} is not allowed for a {} kernel",
                self.kind
            )));
        }
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::Config(format!("{} kernel requires key {name:?}", self.kind)))
        };
        let spec = match self.kind.as_str() {
            "constant" => KernelSpec::constant(need("p", self.p)?, dim),
            "indicator" => KernelSpec::indicator(need("r", self.r)?, dim),
            _ => KernelSpec::waxman(need("q", self.q)?, need("s", self.s)?, dim),
        };
        spec.map_err(|e| match e {
            Error::InvalidParameter(msg) => Error::Config(msg),
            other => other,
        })
    }
}

impl From<&KernelSpec> for KernelConfig {
    fn from(k: &KernelSpec) -> Self {
        let mut c = KernelConfig { kind: String::new(), p: None, r: None, q: None, s: None };
        match k.kind {
            KernelKind::Constant { p } => {
                c.kind = "constant".into();
                c.p = Some(p);
            }
            KernelKind::Indicator { r } => {
                c.kind = "indicator".into();
                c.r = Some(r);
            }
            KernelKind::Waxman { q, s } => {
                c.kind = "waxman".into();
                c.q = Some(q);
                c.s = Some(s);
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tv(c: &[f64]) -> TorusVector {
        TorusVector::new(c.to_vec()).unwrap()
    }

    fn k1(k: i64) -> LatticeIndex {
        LatticeIndex(vec![k])
    }

    #[test]
    fn constant_evaluates_to_p() {
        let f = KernelSpec::constant(0.3, 2).unwrap();
        assert_eq!(eval_kernel(&f, &tv(&[0.1, -0.4])).unwrap(), 0.3);
        assert_eq!(eval_kernel(&f, &tv(&[0.0, 0.0])).unwrap(), 0.3);
    }

    #[test]
    fn indicator_cutoff() {
        let f = KernelSpec::indicator(0.2, 1).unwrap();
        assert_eq!(eval_kernel(&f, &tv(&[0.1])).unwrap(), 1.0);
        assert_eq!(eval_kernel(&f, &tv(&[0.3])).unwrap(), 0.0);
    }

    #[test]
    fn waxman_at_half() {
        let f = KernelSpec::waxman(1.0, 2.0, 1).unwrap();
        let got = eval_kernel(&f, &tv(&[0.5])).unwrap();
        assert!((got - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn waxman_is_clipped() {
        let f = KernelSpec::waxman(3.0, 1.0, 1).unwrap();
        assert_eq!(eval_kernel(&f, &tv(&[0.0])).unwrap(), 1.0);
        assert!(eval_kernel(&f, &tv(&[0.4])).unwrap() <= 1.0);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let f = KernelSpec::indicator(0.2, 2).unwrap();
        assert!(matches!(
            eval_kernel(&f, &tv(&[0.1])),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(KernelSpec::indicator(0.5, 1).is_err());
        assert!(KernelSpec::indicator(0.0, 1).is_err());
        assert!(KernelSpec::constant(1.2, 1).is_err());
        assert!(KernelSpec::waxman(0.0, 1.0, 1).is_err());
        assert!(KernelSpec::waxman(1.0, -1.0, 1).is_err());
        assert!(KernelSpec::constant(0.5, 0).is_err());
    }

    #[test]
    fn indicator_coefficients() {
        let f = KernelSpec::indicator(0.25, 1).unwrap();
        assert!((fourier_coeff(&f, &k1(0)).unwrap() - 0.5).abs() < 1e-15);
        assert!(fourier_coeff(&f, &k1(2)).unwrap().abs() < 1e-15);
        let c1 = fourier_coeff(&f, &k1(1)).unwrap();
        assert!((c1 - 1.0 / PI).abs() < 1e-15);
        let quad = fourier_coeff_quadrature(&f, &k1(1), 256).unwrap();
        assert!((c1 - quad).abs() < 1e-13);
    }

    #[test]
    fn quadrature_matches_one_over_pi_with_2048_nodes() {
        let f = KernelSpec::indicator(0.25, 1).unwrap();
        let got = fourier_coeff_quadrature(&f, &k1(1), 2048).unwrap();
        assert!((got - 1.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn quadrature_of_constant() {
        let f = KernelSpec::constant(0.7, 1).unwrap();
        let got = fourier_coeff_quadrature(&f, &k1(0), 64).unwrap();
        assert!((got - 0.7).abs() < 1e-12);
    }

    #[test]
    fn waxman_mean_is_below_amplitude() {
        let f = KernelSpec::waxman(0.9, 4.0, 1).unwrap();
        let mu = fourier_coeff_quadrature(&f, &k1(0), 256).unwrap();
        assert!(mu > 0.0 && mu < 0.9);
        // ∫_{-1/2}^{1/2} q e^{-s|x|} dx = 2q (1 - e^{-s/2}) / s
        let exact = 2.0 * 0.9 * (1.0 - (-2.0f64).exp()) / 4.0;
        assert!((mu - exact).abs() < 1e-13);
    }

    #[test]
    fn clipped_waxman_mean() {
        // clip point t0 = ln(q)/s = ln 2 / 4 inside the domain
        let (q, s) = (2.0f64, 4.0f64);
        let f = KernelSpec::waxman(q, s, 1).unwrap();
        let t0 = q.ln() / s;
        let exact = 2.0 * (t0 + q * ((-s * t0).exp() - (-s * 0.5).exp()) / s);
        assert!((edge_density(&f).unwrap() - exact).abs() < 1e-13);
    }

    #[test]
    fn quadrature_rejects_high_dimension() {
        let f = KernelSpec::waxman(0.5, 1.0, 4).unwrap();
        assert!(matches!(
            fourier_coeff(&f, &LatticeIndex(vec![0; 4])),
            Err(Error::DimensionTooLarge { d: 4, .. })
        ));
        let g = KernelSpec::indicator(0.1, 4).unwrap();
        assert!(fourier_coeff_quadrature(&g, &LatticeIndex(vec![0; 4]), 32).is_err());
        // analytic route has no dimension limit
        assert!(fourier_coeff(&g, &LatticeIndex(vec![0; 4])).is_ok());
    }

    #[test]
    fn coefficient_dimension_mismatch() {
        let f = KernelSpec::indicator(0.1, 2).unwrap();
        assert!(fourier_coeff(&f, &k1(0)).is_err());
    }

    #[test]
    fn edge_densities() {
        let f = KernelSpec::indicator(0.08, 1).unwrap();
        assert!((edge_density(&f).unwrap() - 0.16).abs() < 1e-15);
        let c = KernelSpec::constant(0.42, 3).unwrap();
        assert_eq!(edge_density(&c).unwrap(), 0.42);
        let g = KernelSpec::indicator(0.1, 2).unwrap();
        assert!((edge_density(&g).unwrap() - 0.04).abs() < 1e-15);
        let quad = fourier_coeff_quadrature(&g, &LatticeIndex(vec![0, 0]), 64).unwrap();
        assert!((quad - 0.04).abs() < 1e-13);
    }

    #[test]
    fn indicator_analytic_agrees_with_quadrature_in_two_dimensions() {
        let f = KernelSpec::indicator(0.13, 2).unwrap();
        let quad = KernelQuadrature::new(&f, 256).unwrap();
        for k in [[0, 0], [1, 0], [3, -7], [50, 50], [-50, 17], [0, 49]] {
            let idx = LatticeIndex(k.to_vec());
            let a = fourier_coeff(&f, &idx).unwrap();
            let q = quad.coeff(&idx);
            assert!((a - q).abs() < 1e-10, "k={k:?}: {a} vs {q}");
        }
    }

    #[test]
    fn waxman_two_dimensional_coefficient_is_consistent() {
        // d = 2 with s = 0 reduces to a constant kernel
        let f = KernelSpec::waxman(0.6, 0.0, 2).unwrap();
        assert!((edge_density(&f).unwrap() - 0.6).abs() < 1e-12);
        assert!(fourier_coeff(&f, &LatticeIndex(vec![1, 2])).unwrap().abs() < 1e-12);
    }

    #[test]
    fn lattice_cube_enumerates_all() {
        let all: Vec<_> = LatticeIndex::cube(2, 1).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], LatticeIndex(vec![-1, -1]));
        assert_eq!(all[4], LatticeIndex(vec![0, 0]));
        assert_eq!(LatticeIndex::cube(1, 3).count(), 7);
    }

    #[test]
    fn convolution_of_constants() {
        let a = KernelSpec::constant(0.3, 1).unwrap();
        let b = KernelSpec::constant(0.6, 1).unwrap();
        let got = convolution_at_zero(&[a, b], 64).unwrap();
        assert!((got - 0.18).abs() < 1e-14);
        let got3 = convolution_at_zero(&[a, b, a], 64).unwrap();
        assert!((got3 - 0.054).abs() < 1e-14);
    }

    #[test]
    fn convolution_rejects_bad_input() {
        let a = KernelSpec::indicator(0.2, 1).unwrap();
        assert!(convolution_at_zero(&[a], 4096).is_err());
        let b = KernelSpec::indicator(0.2, 2).unwrap();
        assert!(matches!(
            convolution_at_zero(&[b, b], 4096),
            Err(Error::DimensionMismatch { expected: 1, .. })
        ));
    }

    /// Σ_{|k| <= cutoff} F̂(k)^m, the Parseval side of the convolution identity.
    fn lattice_power_sum(f: &KernelSpec, m: i32, cutoff: i64) -> f64 {
        (-cutoff..=cutoff)
            .map(|k| fourier_coeff(f, &k1(k)).unwrap().powi(m))
            .sum()
    }

    #[test]
    fn convolution_identity_square_indicator() {
        let f = KernelSpec::indicator(0.25, 1).unwrap();
        let oracle = convolution_at_zero(&[f, f], 4096).unwrap();
        // F * F(0) = ∫ F² = 2r
        assert!((oracle - 0.5).abs() < 1e-12);
        // the m = 2 lattice tail decays like 1/K, so the cutoff must be large
        let lattice = lattice_power_sum(&f, 2, 400_000);
        assert!((oracle - lattice).abs() < 1e-6, "{oracle} vs {lattice}");
    }

    #[test]
    fn convolution_identity_cubic_indicator() {
        let f = KernelSpec::indicator(0.2, 1).unwrap();
        let oracle = convolution_at_zero(&[f, f, f], 4096).unwrap();
        let lattice = lattice_power_sum(&f, 3, 500);
        assert!((oracle - lattice).abs() < 1e-6, "{oracle} vs {lattice}");
    }

    #[test]
    fn convolution_identity_quartic_indicator() {
        let f = KernelSpec::indicator(0.15, 1).unwrap();
        let oracle = convolution_at_zero(&[f, f, f, f], 2048).unwrap();
        let lattice = lattice_power_sum(&f, 4, 500);
        assert!((oracle - lattice).abs() < 1e-6, "{oracle} vs {lattice}");
    }

    #[test]
    fn convolution_of_mixed_waxman_and_indicator() {
        let w = KernelSpec::waxman(0.8, 3.0, 1).unwrap();
        let f = KernelSpec::indicator(0.1, 1).unwrap();
        let oracle = convolution_at_zero(&[w, f, w], 2048).unwrap();
        let q = KernelQuadrature::new(&w, 256).unwrap();
        let lattice: f64 = (-400..=400)
            .map(|k| {
                let wk = q.coeff(&k1(k));
                wk * wk * fourier_coeff(&f, &k1(k)).unwrap()
            })
            .sum();
        assert!((oracle - lattice).abs() < 1e-6, "{oracle} vs {lattice}");
    }

    #[test]
    fn config_round_trip_and_strict_keys() {
        let f = KernelSpec::waxman(0.9, 4.0, 1).unwrap();
        let cfg = KernelConfig::from(&f);
        let text = toml::to_string(&cfg).unwrap();
        let back: KernelConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.into_kernel(1).unwrap(), f);

        let extra: KernelConfig = toml::from_str("kind = \"indicator\"\nr = 0.1\np = 0.2").unwrap();
        assert!(matches!(extra.into_kernel(1), Err(Error::Config(_))));
        let missing: KernelConfig = toml::from_str("kind = \"waxman\"\nq = 0.1").unwrap();
        assert!(missing.into_kernel(1).is_err());
        assert!(toml::from_str::<KernelConfig>("kind = \"constant\"\nfoo = 1.0").is_err());
        let unknown: KernelConfig = toml::from_str("kind = \"gaussian\"").unwrap();
        assert!(unknown.into_kernel(1).is_err());
        let big: KernelConfig = toml::from_str("kind = \"indicator\"\nr = 0.5").unwrap();
        assert!(matches!(big.into_kernel(1), Err(Error::Config(_))));
    }

    fn any_kernel() -> impl Strategy<Value = KernelSpec> {
        prop_oneof![
            (0.0f64..=1.0).prop_map(|p| KernelSpec::constant(p, 1).unwrap()),
            (0.01f64..0.49).prop_map(|r| KernelSpec::indicator(r, 1).unwrap()),
            (0.05f64..3.0, 0.0f64..8.0).prop_map(|(q, s)| KernelSpec::waxman(q, s, 1).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn evaluation_is_probability_radial_and_even(f in any_kernel(), x in -0.5f64..0.5) {
            let v = eval_kernel(&f, &tv(&[x])).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v, eval_kernel(&f, &tv(&[-x])).unwrap());
            prop_assert_eq!(v, f.profile(x.abs()));
        }

        #[test]
        fn coefficients_bounded_even_and_decaying(f in any_kernel(), k in 1i64..200) {
            let quad = KernelQuadrature::new(&f, 512).unwrap();
            let c0 = quad.coeff(&k1(0));
            let ck = quad.coeff(&k1(k));
            prop_assert!(c0 <= 1.0 + 1e-12);
            prop_assert!(ck.abs() <= c0 + 1e-9);
            prop_assert!((ck - quad.coeff(&k1(-k))).abs() < 1e-14);
            // |F̂(k)| <= TV(F) / (2π|k|) and the total variation is at most 2
            let far = quad.coeff(&k1(200)).abs();
            prop_assert!(far <= 1.0 / (200.0 * PI) + 1e-9);
        }

        #[test]
        fn indicator_quadrature_agreement_2d(
            r in 0.01f64..0.49,
            a in -50i64..=50,
            b in -50i64..=50,
        ) {
            let f = KernelSpec::indicator(r, 2).unwrap();
            let k = LatticeIndex(vec![a, b]);
            let exact = fourier_coeff(&f, &k).unwrap();
            let q = fourier_coeff_quadrature(&f, &k, 256).unwrap();
            prop_assert!((exact - q).abs() < 1e-10);
            let neg = LatticeIndex(vec![-a, -b]);
            prop_assert_eq!(exact, fourier_coeff(&f, &neg).unwrap());
        }
    }
}
