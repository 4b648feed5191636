use crate::error::{Error, Result};
use crate::model::Labelling;

/// Simple undirected graph stored as a dense symmetric bit matrix with an empty diagonal.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Graph { n, words, bits: vec![0; n * words] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.insert(i, j);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::empty(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at node {i}")));
            }
            g.insert(i, j);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds the undirected edge `{i, j}`; self-loops are ignored.
    pub(crate) fn insert(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.bits[i * self.words + j / 64] |= 1u64 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1u64 << (i % 64);
    }

    pub(crate) fn remove(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] &= !(1u64 << (j % 64));
        self.bits[j * self.words + i / 64] &= !(1u64 << (i % 64));
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + b)
            })
        })
    }

    /// Edges `(i, j)` with `i < j`, row-major.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }

    /// Number of common neighbours of `i` and `j`.
    pub fn common_neighbors(&self, i: usize, j: usize) -> usize {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `d_Ham(A, B) = Σ_{i,j} 1(A_ij ≠ B_ij)` over ordered pairs.
    pub fn hamming(&self, other: &Graph) -> Result<usize> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { expected: self.n, got: other.n });
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Simultaneous relabelling: node `i` of `self` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: perm.len() });
        }
        let mut g = Graph::empty(self.n);
        for (i, j) in self.edges() {
            g.insert(perm[i], perm[j]);
        }
        Ok(g)
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must equal n");
        (0..self.n).map(|i| self.neighbors(i).map(|j| x[j]).sum()).collect()
    }

    /// Dense `n × n` copy in row-major order.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for j in self.neighbors(i) {
                out[i * self.n + j] = 1.0;
            }
        }
        out
    }
}

/// Per-node neighbour counts split by label agreement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeStats {
    pub z_in: Vec<usize>,
    pub z_out: Vec<usize>,
}

impl DegreeStats {
    pub fn n(&self) -> usize {
        self.z_in.len()
    }

    /// `z_in(i) - z_out(i)` for every node.
    pub fn margins(&self) -> impl Iterator<Item = i64> + '_ {
        self.z_in.iter().zip(&self.z_out).map(|(&a, &b)| a as i64 - b as i64)
    }
}

/// Counts same-label and different-label neighbours of every node.
pub fn degree_stats(graph: &Graph, labels: &Labelling) -> Result<DegreeStats> {
    if labels.len() != graph.n() {
        return Err(Error::LengthMismatch { expected: graph.n(), got: labels.len() });
    }
    let l = labels.as_slice();
    let mut z_in = vec![0; graph.n()];
    let mut z_out = vec![0; graph.n()];
    for i in 0..graph.n() {
        for j in graph.neighbors(i) {
            if l[i] == l[j] {
                z_in[i] += 1;
            } else {
                z_out[i] += 1;
            }
        }
    }
    Ok(DegreeStats { z_in, z_out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[u8]) -> Labelling {
        Labelling::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bit_storage_is_symmetric_and_hollow() {
        let g = Graph::from_edges(130, [(0, 129), (64, 65), (3, 70)]).unwrap();
        assert!(g.has_edge(129, 0) && g.has_edge(0, 129));
        assert!(g.has_edge(65, 64));
        assert!((0..130).all(|i| !g.has_edge(i, i)));
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![129]);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 129), (3, 70), (64, 65)]);
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
        assert!(Graph::from_edges(3, [(1, 3)]).is_err());
    }

    #[test]
    fn two_disjoint_edges() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let s = degree_stats(&g, &labels(&[1, 1, 2, 2])).unwrap();
        assert_eq!(s.z_in, vec![1; 4]);
        assert_eq!(s.z_out, vec![0; 4]);
    }

    #[test]
    fn complete_graph_counts() {
        let g = Graph::complete(4);
        let s = degree_stats(&g, &labels(&[1, 2, 1, 2])).unwrap();
        assert_eq!(s.z_in, vec![1; 4]);
        assert_eq!(s.z_out, vec![2; 4]);
        assert_eq!(s.margins().collect::<Vec<_>>(), vec![-1; 4]);
    }

    #[test]
    fn degree_stats_length_mismatch() {
        let g = Graph::empty(4);
        assert!(matches!(
            degree_stats(&g, &labels(&[1, 2])),
            Err(Error::LengthMismatch { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn hamming_counts_both_triangles() {
        let a = Graph::from_edges(5, [(0, 1), (1, 2)]).unwrap();
        let b = Graph::from_edges(5, [(0, 1), (3, 4)]).unwrap();
        assert_eq!(a.hamming(&b).unwrap(), 4);
        assert_eq!(a.hamming(&a).unwrap(), 0);
    }

    #[test]
    fn common_neighbors_and_permutation() {
        let g = Graph::complete(5);
        assert_eq!(g.common_neighbors(0, 1), 3);
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let p = path.permuted(&[2, 0, 1]).unwrap();
        assert!(p.has_edge(2, 0) && p.has_edge(0, 1) && !p.has_edge(2, 1));
    }
}
