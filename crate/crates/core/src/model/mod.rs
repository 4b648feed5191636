//! Soft geometric block model: balanced labels, uniform torus positions and
//! independent Bernoulli edges whose probability is `F_in` or `F_out` of the
//! ℓ∞ torus distance.

mod graph;
pub mod io;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

pub use graph::{degree_stats, DegreeStats, Graph};

use crate::error::{Error, Result};
use crate::kernels::{edge_density, KernelSpec};
use crate::rng::{row_draws, stream_rng, LABEL_STREAM, POSITION_STREAM};
use crate::torus::{torus_distance, TorusVector};

/// Community assignment with entries in `{1, 2}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labelling(Vec<u8>);

impl Labelling {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if let Some(bad) = labels.iter().find(|&&l| l != 1 && l != 2) {
            return Err(Error::invalid(format!("labels must be 1 or 2, found {bad}")));
        }
        Ok(Labelling(labels))
    }

    /// Labels `1` for the first `n/2` nodes and `2` for the rest.
    pub fn planted(n: usize) -> Self {
        Labelling((0..n).map(|i| if i < n / 2 { 1 } else { 2 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn count(&self, label: u8) -> usize {
        self.0.iter().filter(|&&l| l == label).count()
    }

    /// Swaps the names of the two communities.
    pub fn flipped(&self) -> Labelling {
        Labelling(self.0.iter().map(|&l| 3 - l).collect())
    }

    /// Node `i` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Labelling {
        let mut out = vec![0u8; self.0.len()];
        for (i, &l) in self.0.iter().enumerate() {
            out[perm[i]] = l;
        }
        Labelling(out)
    }

    /// `±1/√n` vector that is positive on label 1.
    pub fn indicator_vector(&self) -> Vec<f64> {
        let s = 1.0 / (self.0.len() as f64).sqrt();
        self.0.iter().map(|&l| if l == 1 { s } else { -s }).collect()
    }
}

/// Full description of a two-community model with balanced blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SgbmParams {
    pub n: usize,
    pub d: usize,
    pub f_in: KernelSpec,
    pub f_out: KernelSpec,
    pub seed: u64,
}

impl SgbmParams {
    pub fn new(n: usize, f_in: KernelSpec, f_out: KernelSpec, seed: u64) -> Result<Self> {
        let p = SgbmParams { n, d: f_in.dim(), f_in, f_out, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_balanced(self.n)?;
        if self.d == 0 {
            return Err(Error::invalid("dimension d must be positive"));
        }
        for k in [&self.f_in, &self.f_out] {
            if k.dim() != self.d {
                return Err(Error::DimensionMismatch { expected: self.d, got: k.dim() });
            }
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SgbmParams { seed, ..self.clone() }
    }

    /// `(μ_in, μ_out)`.
    pub fn densities(&self) -> Result<(f64, f64)> {
        Ok((edge_density(&self.f_in)?, edge_density(&self.f_out)?))
    }
}

fn check_balanced(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "n = {n}: balanced blocks require an even node count n >= 2"
        )));
    }
    Ok(())
}

/// Uniformly random labelling with exactly `n/2` nodes in each community.
pub fn sample_labelling<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Labelling> {
    check_balanced(n)?;
    let mut labels: Vec<u8> = (0..n).map(|i| if i < n / 2 { 1 } else { 2 }).collect();
    labels.shuffle(rng);
    Ok(Labelling(labels))
}

/// One realisation of the model.
#[derive(Debug, Clone)]
pub struct Sample {
    pub graph: Graph,
    pub labels: Labelling,
    pub positions: Vec<TorusVector>,
}

/// Draws labels, positions and edges. Edge `{i, j}` uses the counter-based draw
/// keyed by `(seed, min(i,j), max(i,j))`, so the graph does not depend on how rows
/// are scheduled across threads.
pub fn sample_graph(params: &SgbmParams) -> Result<Sample> {
    params.validate()?;
    let n = params.n;
    let d = params.d;
    let labels = sample_labelling(n, &mut stream_rng(params.seed, LABEL_STREAM))?;

    let mut pos_rng = stream_rng(params.seed, POSITION_STREAM);
    let coords: Vec<f64> = (0..n * d).map(|_| pos_rng.random::<f64>() - 0.5).collect();

    let l = labels.as_slice();
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &coords[i * d..(i + 1) * d];
            (i + 1..n)
                .zip(row_draws(params.seed, i))
                .filter_map(|(j, u)| {
                    let kernel = if l[i] == l[j] { &params.f_in } else { &params.f_out };
                    let dist = torus_distance(xi, &coords[j * d..(j + 1) * d]);
                    (u < kernel.profile(dist)).then_some(j)
                })
                .collect()
        })
        .collect();

    let mut graph = Graph::empty(n);
    for (i, row) in rows.iter().enumerate() {
        for &j in row {
            graph.insert(i, j);
        }
    }
    let positions = coords
        .chunks_exact(d)
        .map(TorusVector::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(Sample { graph, labels, positions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::pair_draw;

    fn sbm(n: usize, p_in: f64, p_out: f64, seed: u64) -> SgbmParams {
        SgbmParams::new(
            n,
            KernelSpec::constant(p_in, 1).unwrap(),
            KernelSpec::constant(p_out, 1).unwrap(),
            seed,
        )
        .unwrap()
    }

    fn gbm(n: usize, r_in: f64, r_out: f64, seed: u64) -> SgbmParams {
        SgbmParams::new(
            n,
            KernelSpec::indicator(r_in, 1).unwrap(),
            KernelSpec::indicator(r_out, 1).unwrap(),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn labelling_of_two_nodes() {
        let l = sample_labelling(2, &mut stream_rng(3, 0)).unwrap();
        assert_eq!(l.count(1), 1);
        assert_eq!(l.count(2), 1);
    }

    #[test]
    fn labelling_is_deterministic_and_balanced() {
        let a = sample_labelling(1000, &mut stream_rng(42, LABEL_STREAM)).unwrap();
        let b = sample_labelling(1000, &mut stream_rng(42, LABEL_STREAM)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count(1), 500);
        let c = sample_labelling(1000, &mut stream_rng(43, LABEL_STREAM)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn labelling_rejects_odd_or_tiny() {
        let mut rng = stream_rng(0, 0);
        assert!(sample_labelling(7, &mut rng).is_err());
        assert!(sample_labelling(0, &mut rng).is_err());
        let err = SgbmParams::new(
            7,
            KernelSpec::constant(0.5, 1).unwrap(),
            KernelSpec::constant(0.5, 1).unwrap(),
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("balanced blocks"));
    }

    #[test]
    fn labelling_values_are_checked() {
        assert!(Labelling::new(vec![1, 2, 3]).is_err());
        let l = Labelling::new(vec![1, 2, 2]).unwrap();
        assert_eq!(l.flipped().as_slice(), &[2, 1, 1]);
    }

    #[test]
    fn params_dimension_mismatch() {
        let r = SgbmParams::new(
            4,
            KernelSpec::indicator(0.1, 1).unwrap(),
            KernelSpec::indicator(0.1, 2).unwrap(),
            0,
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn deterministic_kernels_give_two_edges() {
        let s = sample_graph(&sbm(4, 1.0, 0.0, 9)).unwrap();
        assert_eq!(s.graph.edge_count(), 2);
        for (i, j) in s.graph.edges() {
            assert_eq!(s.labels.as_slice()[i], s.labels.as_slice()[j]);
        }
    }

    #[test]
    fn zero_kernels_give_empty_graph() {
        let s = sample_graph(&sbm(50, 0.0, 0.0, 1)).unwrap();
        assert_eq!(s.graph.edge_count(), 0);
        assert_eq!(s.positions.len(), 50);
    }

    #[test]
    fn output_matches_pair_draws() {
        let p = gbm(60, 0.2, 0.05, 11);
        let s = sample_graph(&p).unwrap();
        let l = s.labels.as_slice();
        for i in 0..60 {
            for j in i + 1..60 {
                let k = if l[i] == l[j] { &p.f_in } else { &p.f_out };
                let dist = crate::torus::torus_displacement(&s.positions[i], &s.positions[j])
                    .unwrap()
                    .norm();
                let expected = pair_draw(p.seed, i, j) < k.profile(dist);
                assert_eq!(s.graph.has_edge(i, j), expected);
            }
        }
    }

    #[test]
    fn identical_across_thread_counts() {
        let p = gbm(300, 0.1, 0.03, 5);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_graph(&p).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.positions, b.positions);
    }

    #[test]
    fn degree_sums_match_edge_split() {
        let s = sample_graph(&gbm(400, 0.1, 0.05, 2)).unwrap();
        let st = degree_stats(&s.graph, &s.labels).unwrap();
        let l = s.labels.as_slice();
        let intra = s.graph.edges().filter(|&(i, j)| l[i] == l[j]).count();
        let inter = s.graph.edge_count() - intra;
        assert_eq!(st.z_in.iter().sum::<usize>(), 2 * intra);
        assert_eq!(st.z_out.iter().sum::<usize>(), 2 * inter);
        for i in 0..400 {
            assert_eq!(st.z_in[i] + st.z_out[i], s.graph.degree(i));
        }
    }

    #[test]
    fn constant_kernel_edge_count_matches_binomial() {
        let (n, p_in, p_out) = (200usize, 0.3, 0.1);
        let half = n / 2;
        let intra_pairs = 2 * half * (half - 1) / 2;
        let inter_pairs = half * half;
        let mean = intra_pairs as f64 * p_in + inter_pairs as f64 * p_out;
        let var = intra_pairs as f64 * p_in * (1.0 - p_in) + inter_pairs as f64 * p_out * (1.0 - p_out);
        let seeds = 50;
        let total: usize = (0..seeds)
            .map(|s| sample_graph(&sbm(n, p_in, p_out, s)).unwrap().graph.edge_count())
            .sum();
        let avg = total as f64 / seeds as f64;
        let se = (var / seeds as f64).sqrt();
        assert!((avg - mean).abs() < 4.0 * se, "avg {avg}, mean {mean}, se {se}");
    }

    #[test]
    fn gbm_mean_degree() {
        // (n/2 - 1) μ_in + (n/2) μ_out with μ = 2r
        let expected = 999.0 * 0.16 + 1000.0 * 0.04;
        let seeds = 10;
        let mean: f64 = (0..seeds)
            .map(|s| {
                let g = sample_graph(&gbm(2000, 0.08, 0.02, 100 + s)).unwrap().graph;
                2.0 * g.edge_count() as f64 / 2000.0
            })
            .sum::<f64>()
            / seeds as f64;
        assert!((mean - expected).abs() < 0.05 * expected, "{mean} vs {expected}");
    }
}
