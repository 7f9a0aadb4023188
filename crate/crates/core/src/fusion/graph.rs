use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;

use super::FusionError;

/// Directed sensor graph. Arc `(i, j)` means node `j` receives from node `i`;
/// every node is implicitly its own in-neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    n: usize,
    in_nbrs: Vec<BTreeSet<usize>>,
}

impl NetworkGraph {
    pub fn new(n: usize, arcs: &[(usize, usize)]) -> Result<Self, FusionError> {
        let mut in_nbrs: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        for &(i, j) in arcs {
            if i >= n || j >= n {
                return Err(FusionError::UnknownNode { edge: (i, j), nodes: n });
            }
            in_nbrs[j].insert(i);
        }
        Ok(Self { n, in_nbrs })
    }

    /// Graph with both arcs for every edge.
    pub fn undirected(n: usize, edges: &[(usize, usize)]) -> Result<Self, FusionError> {
        let arcs: Vec<(usize, usize)> = edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        Self::new(n, &arcs)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::undirected(n, &edges).expect("indices in range")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `N^{(j)}`, including `j`, ascending.
    pub fn in_neighbours(&self, j: usize) -> Vec<usize> {
        self.in_nbrs[j].iter().copied().collect()
    }

    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        self.in_nbrs[j].contains(&i)
    }

    /// First arc without its reverse, if any.
    pub fn asymmetric_arc(&self) -> Option<(usize, usize)> {
        for j in 0..self.n {
            for &i in &self.in_nbrs[j] {
                if !self.has_arc(j, i) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    fn out_nbrs(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for j in 0..self.n {
            for &i in &self.in_nbrs[j] {
                if i != j {
                    out[i].push(j);
                }
            }
        }
        out
    }

    fn hops_from(&self, src: usize, out: &[Vec<usize>]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[src] = Some(0);
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            let d = dist[u].expect("visited");
            for &v in &out[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    q.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.diameter().is_some()
    }

    /// Longest shortest directed path, or `None` when not strongly connected.
    pub fn diameter(&self) -> Option<usize> {
        let out = self.out_nbrs();
        let mut best = 0;
        for s in 0..self.n {
            for d in self.hops_from(s, &out) {
                best = best.max(d?);
            }
        }
        Some(best)
    }
}

/// Row-stochastic consensus weights `ω^{(i,j)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusMatrix {
    weights: DMatrix<f64>,
}

impl ConsensusMatrix {
    pub fn new(weights: DMatrix<f64>, g: &NetworkGraph) -> Result<Self, FusionError> {
        let n = g.len();
        if weights.nrows() != n || weights.ncols() != n {
            return Err(FusionError::InvalidConsensusMatrix(format!("expected {n}x{n}")));
        }
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let w = weights[(i, j)];
                if !(w >= 0.0) {
                    return Err(FusionError::InvalidConsensusMatrix(format!("negative weight at ({i},{j})")));
                }
                if w > 0.0 && !g.has_arc(j, i) {
                    return Err(FusionError::InvalidConsensusMatrix(format!(
                        "node {i} has weight on non-neighbour {j}"
                    )));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(FusionError::InvalidConsensusMatrix(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.nrows() == 0
    }
}

/// Metropolis weights `1 / (1 + max(|N^{(i)}|, |N^{(j)}|))` off the diagonal,
/// remainder on it. Needs an undirected, connected graph.
pub fn metropolis_weights(g: &NetworkGraph) -> Result<ConsensusMatrix, FusionError> {
    if let Some(arc) = g.asymmetric_arc() {
        return Err(FusionError::NotUndirected(arc));
    }
    if !g.is_strongly_connected() {
        return Err(FusionError::Disconnected);
    }
    let n = g.len();
    let deg: Vec<usize> = (0..n).map(|i| g.in_neighbours(i).len()).collect();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut off = 0.0;
        for j in g.in_neighbours(i) {
            if j != i {
                let v = 1.0 / (1.0 + deg[i].max(deg[j]) as f64);
                w[(i, j)] = v;
                off += v;
            }
        }
        w[(i, i)] = 1.0 - off;
    }
    ConsensusMatrix::new(w, g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCheck {
    /// `max_{ij} |(Ωⁿ)_{ij} − 1/|N||`.
    pub deviation: f64,
    /// Whether `Ω` is primitive (some power is entrywise positive).
    pub primitive: bool,
}

pub fn consensus_matrix_power_check(omega: &ConsensusMatrix, n: u32) -> PowerCheck {
    let m = omega.weights();
    let size = m.nrows();
    let mut p = DMatrix::identity(size, size);
    for _ in 0..n {
        p = &p * m;
    }
    let target = 1.0 / size as f64;
    let deviation = p.iter().map(|v| (v - target).abs()).fold(0.0, f64::max);

    // Wielandt: primitive iff the pattern power (s−1)²+1 is positive.
    let pattern = m.map(|v| v > 0.0);
    let bool_mul = |a: &DMatrix<bool>, b: &DMatrix<bool>| {
        DMatrix::from_fn(size, size, |i, j| (0..size).any(|k| a[(i, k)] && b[(k, j)]))
    };
    let mut reach = pattern.clone();
    let steps = (size.saturating_sub(1)).pow(2) + 1;
    for _ in 1..steps {
        reach = bool_mul(&reach, &pattern);
    }
    PowerCheck {
        deviation,
        primitive: size > 0 && reach.iter().all(|&b| b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_node_metropolis() {
        let g = NetworkGraph::undirected(2, &[(0, 1)]).unwrap();
        let w = metropolis_weights(&g).unwrap();
        let want = [[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((w.get(i, j) - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn complete_three_and_single() {
        let w = metropolis_weights(&NetworkGraph::complete(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.5 } else { 0.25 };
                assert!((w.get(i, j) - want).abs() < 1e-15);
            }
        }
        let one = metropolis_weights(&NetworkGraph::complete(1)).unwrap();
        assert_eq!(one.get(0, 0), 1.0);
    }

    #[test]
    fn directed_graph_is_rejected() {
        let g = NetworkGraph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(metropolis_weights(&g), Err(FusionError::NotUndirected((0, 1))));
        let split = NetworkGraph::undirected(3, &[(0, 1)]).unwrap();
        assert_eq!(metropolis_weights(&split), Err(FusionError::Disconnected));
    }

    #[test]
    fn reducible_matrix_is_flagged() {
        let g = NetworkGraph::undirected(2, &[(0, 1)]).unwrap();
        let id = ConsensusMatrix::new(DMatrix::identity(2, 2), &g).unwrap();
        let c = consensus_matrix_power_check(&id, 50);
        assert!(!c.primitive);
        assert!((c.deviation - 0.5).abs() < 1e-15);
        let w = metropolis_weights(&g).unwrap();
        assert!(consensus_matrix_power_check(&w, 1).primitive);
    }

    #[test]
    fn diameter_of_path() {
        let g = NetworkGraph::undirected(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(g.diameter(), Some(3));
    }
}
