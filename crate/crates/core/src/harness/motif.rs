//! A simplified common-neighbour baseline.
//!
//! Edges whose endpoints share many neighbours are likely intra-community in a
//! geometric graph. Counts are split in two by exact one-dimensional 2-means,
//! the low group is deleted, and the two largest surviving components seed the
//! communities. Everything else is then labelled by neighbour majority.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{Graph, Labelling};
use crate::spectral::{eigendecompose, fiedler_partition};

/// Baseline labelling and whether the spectral fallback was used.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifOutcome {
    pub labels: Labelling,
    pub fallback: bool,
}

/// Threshold splitting `values` into the two groups of least total squared
/// deviation. Values `>= threshold` form the upper group; `None` when all equal.
pub fn two_means_threshold(values: &[u32]) -> Option<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let (lo, hi) = (*sorted.first()?, *sorted.last()?);
    if lo == hi {
        return None;
    }
    let n = sorted.len();
    let mut prefix = vec![0.0f64; n + 1];
    let mut prefix_sq = vec![0.0f64; n + 1];
    for (i, &v) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v as f64;
        prefix_sq[i + 1] = prefix_sq[i] + (v as f64).powi(2);
    }
    let sse = |a: usize, b: usize| {
        let m = (b - a) as f64;
        let s = prefix[b] - prefix[a];
        prefix_sq[b] - prefix_sq[a] - s * s / m
    };
    let mut best: Option<(f64, usize)> = None;
    for split in 1..n {
        // only split between distinct values so the threshold is well defined
        if sorted[split] == sorted[split - 1] {
            continue;
        }
        let cost = sse(0, split) + sse(split, n);
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, split));
        }
    }
    best.map(|(_, split)| (sorted[split - 1] as f64 + sorted[split] as f64) / 2.0)
}

/// Connected components with at least one edge, largest first; ties by smallest node.
fn components(graph: &Graph) -> Vec<Vec<usize>> {
    let n = graph.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] || graph.degree(start) == 0 {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in graph.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        out.push(comp);
    }
    // stable sort keeps discovery order, i.e. smallest first node, among equal sizes
    out.sort_by_key(|c| std::cmp::Reverse(c.len()));
    out
}

/// Common-neighbour clustering with a Fiedler fallback when fewer than two
/// components survive the filtering.
pub fn motif_baseline(graph: &Graph) -> Result<MotifOutcome> {
    let n = graph.n();
    if n < 4 {
        return Err(Error::invalid(format!("motif baseline needs n >= 4, got {n}")));
    }
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    let counts: Vec<u32> = edges.iter().map(|&(i, j)| graph.common_neighbors(i, j) as u32).collect();
    let mut filtered = graph.clone();
    if let Some(threshold) = two_means_threshold(&counts) {
        for (&(i, j), &c) in edges.iter().zip(&counts) {
            if (c as f64) < threshold {
                filtered.remove(i, j);
            }
        }
    }
    let comps = components(&filtered);
    if comps.len() < 2 {
        let spectrum = eigendecompose(graph)?;
        return Ok(MotifOutcome { labels: fiedler_partition(&spectrum), fallback: true });
    }
    let mut label = vec![0u8; n];
    for &i in &comps[0] {
        label[i] = 1;
    }
    for &i in &comps[1] {
        label[i] = 2;
    }
    // grow the seeds outwards; nodes with no labelled neighbour wait for a later round
    loop {
        let updates: Vec<(usize, u8)> = (0..n)
            .filter(|&i| label[i] == 0)
            .filter_map(|i| {
                let (mut ones, mut twos) = (0usize, 0usize);
                for j in graph.neighbors(i) {
                    match label[j] {
                        1 => ones += 1,
                        2 => twos += 1,
                        _ => {}
                    }
                }
                match (ones + twos, ones > twos) {
                    (0, _) => None,
                    (_, true) => Some((i, 1)),
                    (_, false) => Some((i, 2)),
                }
            })
            .collect();
        if updates.is_empty() {
            break;
        }
        for (i, l) in updates {
            label[i] = l;
        }
    }
    for l in label.iter_mut().filter(|l| **l == 0) {
        *l = 2;
    }
    Ok(MotifOutcome { labels: Labelling::new(label)?, fallback: false })
}
