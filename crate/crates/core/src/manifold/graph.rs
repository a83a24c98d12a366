use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Csr, Domain, Laplacian, Neighbor, SparseSymmetric, UnitKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub conductance: f64,
    pub length: f64,
}

impl GraphEdge {
    pub fn unit(a: usize, b: usize) -> Self {
        Self {
            a,
            b,
            conductance: 1.0,
            length: 1.0,
        }
    }
}

/// Abstract discrete manifold: vertex volumes, edge conductances, edge lengths.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    weights: Vec<f64>,
    edges: Vec<[usize; 2]>,
    conductances: Vec<f64>,
    lengths: Vec<f64>,
    neighbors: Csr<Neighbor>,
    vertex_edges: Csr<usize>,
    units: Vec<usize>,
    dimension: usize,
}

impl WeightedGraph {
    pub fn new(weights: Vec<f64>, edges: &[GraphEdge]) -> Result<Self> {
        let n = weights.len();
        if n < 2 {
            return Err(Error::InvalidGraph("need at least two vertices".into()));
        }
        if let Some(v) = weights.iter().position(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidGraph(format!("vertex {v} has non-positive weight")));
        }
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(edges.len());
        let mut conductances = Vec::with_capacity(edges.len());
        let mut lengths = Vec::with_capacity(edges.len());
        for e in edges {
            if e.a >= n || e.b >= n || e.a == e.b {
                return Err(Error::InvalidGraph(format!("bad edge ({}, {})", e.a, e.b)));
            }
            let key = (e.a.min(e.b), e.a.max(e.b));
            if !seen.insert(key) {
                return Err(Error::InvalidGraph(format!("duplicate edge {key:?}")));
            }
            if !(e.conductance > 0.0) || !(e.length > 0.0) || !e.conductance.is_finite() || !e.length.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge {key:?} needs positive conductance and length"
                )));
            }
            pairs.push([key.0, key.1]);
            conductances.push(e.conductance);
            lengths.push(e.length);
        }
        let mut nbr = vec![Vec::new(); n];
        let mut ve = vec![Vec::new(); n];
        for (i, &[a, b]) in pairs.iter().enumerate() {
            nbr[a].push(Neighbor {
                vertex: b,
                edge: i,
                length: lengths[i],
                unfolded: false,
            });
            nbr[b].push(Neighbor {
                vertex: a,
                edge: i,
                length: lengths[i],
                unfolded: false,
            });
            ve[a].push(i);
            ve[b].push(i);
        }
        for l in &mut nbr {
            l.sort_by_key(|x| x.vertex);
        }
        let g = Self {
            weights,
            edges: pairs,
            conductances,
            lengths,
            neighbors: Csr::from_lists(nbr),
            vertex_edges: Csr::from_lists(ve),
            units: (0..n).collect(),
            dimension: 2,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Unit weights, conductances and lengths.
    pub fn unit(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges: Vec<_> = pairs.iter().map(|&(a, b)| GraphEdge::unit(a, b)).collect();
        Self::new(vec![1.0; n], &edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::unit(n, &pairs)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::unit(n, &pairs)
    }

    pub fn path(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Self::unit(n, &pairs)
    }

    /// Dimension used by the comparison constants (default 2).
    pub fn with_dimension(mut self, n: usize) -> Self {
        self.dimension = n.max(2);
        self
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn conductances(&self) -> &[f64] {
        &self.conductances
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Largest ratio of weighted degree to vertex volume.
    pub fn max_degree_ratio(&self) -> f64 {
        (0..self.weights.len())
            .map(|v| {
                let d: f64 = self.vertex_edges.row(v).iter().map(|&e| self.conductances[e]).sum();
                d / self.weights[v]
            })
            .fold(0.0, f64::max)
    }

    fn is_connected(&self) -> bool {
        let n = self.weights.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for nb in self.neighbors.row(v) {
                if !seen[nb.vertex] {
                    seen[nb.vertex] = true;
                    count += 1;
                    stack.push(nb.vertex);
                }
            }
        }
        count == n
    }
}

impl Domain for WeightedGraph {
    fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    fn edge_lengths(&self) -> &[f64] {
        &self.lengths
    }

    fn neighbors(&self, v: usize) -> &[Neighbor] {
        self.neighbors.row(v)
    }

    fn vertex_edges(&self, v: usize) -> &[usize] {
        self.vertex_edges.row(v)
    }

    fn unit_kind(&self) -> UnitKind {
        UnitKind::Vertex
    }

    fn unit_count(&self) -> usize {
        self.weights.len()
    }

    fn unit_volume(&self, u: usize) -> f64 {
        self.weights[u]
    }

    fn unit_vertices(&self, u: usize) -> &[usize] {
        std::slice::from_ref(&self.units[u])
    }

    fn vertex_units(&self, v: usize) -> &[usize] {
        std::slice::from_ref(&self.units[v])
    }

    fn edge_units(&self, e: usize) -> Option<[usize; 2]> {
        Some(self.edges[e])
    }

    fn edge_interface_measure(&self, e: usize) -> f64 {
        self.conductances[e]
    }

    fn vertex_masses(&self) -> &[f64] {
        &self.weights
    }

    fn laplacian(&self) -> Laplacian {
        Laplacian {
            stiffness: SparseSymmetric::from_edge_weights(self.weights.len(), &self.edges, &self.conductances),
            mass: self.weights.clone(),
        }
    }

    fn dimension(&self) -> usize {
        self.dimension
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertex_stiffness() {
        let g = WeightedGraph::unit(2, &[(0, 1)]).unwrap();
        let d = g.laplacian().stiffness.to_dense();
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d[(0, 1)], -1.0);
        assert_eq!(d[(1, 0)], -1.0);
        assert_eq!(d[(1, 1)], 1.0);
    }

    #[test]
    fn rejects_disconnected() {
        assert!(matches!(
            WeightedGraph::unit(4, &[(0, 1), (2, 3)]),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(WeightedGraph::unit(3, &[(0, 1), (1, 0), (1, 2)]).is_err());
        assert!(WeightedGraph::unit(3, &[(0, 0), (1, 2)]).is_err());
        assert!(WeightedGraph::new(vec![1.0, 0.0], &[GraphEdge::unit(0, 1)]).is_err());
    }

    #[test]
    fn cycle_degree_ratio() {
        assert_eq!(WeightedGraph::cycle(4).unwrap().max_degree_ratio(), 2.0);
    }
}
