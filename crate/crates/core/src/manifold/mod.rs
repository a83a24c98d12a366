//! Discrete manifolds: intrinsic triangle meshes and weighted graphs.
//!
//! Both representations expose the same [`Domain`] view so that distances,
//! balls, partitions and the Cheeger machinery are written once. A mesh
//! partitions its *faces* (the interface is the set of edges shared by
//! differently labelled faces, measured by length); a graph partitions its
//! *vertices* (the interface is the set of cut edges, measured by
//! conductance).

mod distance;
pub mod generators;
mod graph;
mod laplacian;
mod mesh;
pub mod off;

use serde::{Deserialize, Serialize};

pub use distance::{ball, geodesic_distance, Ball, BallMeter, Dijkstra, DistanceField};
pub use graph::{GraphEdge, WeightedGraph};
pub use laplacian::{Laplacian, SparseSymmetric};
pub use mesh::SurfaceMesh;

use crate::error::{Error, Result};

/// Compressed adjacency list.
#[derive(Debug, Clone, Default)]
pub struct Csr<T> {
    offsets: Vec<usize>,
    items: Vec<T>,
}

impl<T: Clone> Csr<T> {
    pub fn from_lists(lists: Vec<Vec<T>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut items = Vec::new();
        for l in lists {
            items.extend(l);
            offsets.push(items.len());
        }
        Self { offsets, items }
    }
}

impl<T> Csr<T> {
    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.items[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn rows(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }
}

/// Neighbour entry of the metric graph underlying a domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: usize,
    /// The edge joining the two vertices, or for an unfolded link the edge
    /// it crosses.
    pub edge: usize,
    pub length: f64,
    /// `true` for a straight segment through two faces sharing `edge`.
    pub unfolded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// What a partition labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Vertex,
    Face,
}

/// A two-sided labelling of the units of a domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    kind: UnitKind,
    labels: Vec<Side>,
}

impl Partition {
    pub fn new(kind: UnitKind, labels: Vec<Side>) -> Result<Self> {
        let a = labels.iter().filter(|&&s| s == Side::A).count();
        if a == 0 || a == labels.len() {
            return Err(Error::InvalidPartition("both sides must be nonempty".into()));
        }
        Ok(Self { kind, labels })
    }

    pub fn from_fn(kind: UnitKind, count: usize, mut side: impl FnMut(usize) -> Side) -> Result<Self> {
        Self::new(kind, (0..count).map(&mut side).collect())
    }

    pub fn kind(&self) -> UnitKind {
        self.kind
    }

    pub fn labels(&self) -> &[Side] {
        &self.labels
    }

    pub fn side(&self, unit: usize) -> Side {
        self.labels[unit]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The same cut with A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            kind: self.kind,
            labels: self.labels.iter().map(|s| s.flip()).collect(),
        }
    }

    /// Units on side A, ascending.
    pub fn side_a(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&u| self.labels[u] == Side::A).collect()
    }
}

/// `Vol(A)`, `Vol(B)` and `Vol(Σ)` of a partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionMeasures {
    pub vol_a: f64,
    pub vol_b: f64,
    pub vol_sigma: f64,
}

impl PartitionMeasures {
    /// `Vol(Σ) / min(Vol(A), Vol(B))`.
    pub fn ratio(&self) -> f64 {
        self.vol_sigma / self.vol_a.min(self.vol_b)
    }

    pub fn total(&self) -> f64 {
        self.vol_a + self.vol_b
    }
}

/// Measures of a vertex region, optionally split by a partition.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionMeasures {
    pub volume: f64,
    pub vol_a: f64,
    pub vol_b: f64,
    pub vol_sigma: f64,
}

/// Common view of meshes and graphs.
///
/// Units are faces (mesh) or vertices (graph). Each edge separates at most two
/// units; the edge's interface measure is its length (mesh) or conductance
/// (graph).
pub trait Domain: Sync {
    fn vertex_count(&self) -> usize;
    fn edges(&self) -> &[[usize; 2]];
    /// Metric length of each edge.
    fn edge_lengths(&self) -> &[f64];
    fn neighbors(&self, v: usize) -> &[Neighbor];
    /// Edges incident to a vertex, by id.
    fn vertex_edges(&self, v: usize) -> &[usize];

    fn unit_kind(&self) -> UnitKind;
    fn unit_count(&self) -> usize;
    fn unit_volume(&self, u: usize) -> f64;
    fn unit_vertices(&self, u: usize) -> &[usize];
    fn vertex_units(&self, v: usize) -> &[usize];
    /// The two units an edge separates; `None` for mesh boundary edges.
    fn edge_units(&self, e: usize) -> Option<[usize; 2]>;
    /// Contribution of an edge to `Vol(Σ)` when it lies on the interface.
    fn edge_interface_measure(&self, e: usize) -> f64;

    /// Per-vertex mass used with the Laplacian (lumped areas or weights).
    fn vertex_masses(&self) -> &[f64];
    fn laplacian(&self) -> Laplacian;
    /// Manifold dimension entering the comparison constants.
    fn dimension(&self) -> usize;

    fn total_volume(&self) -> f64 {
        (0..self.unit_count()).map(|u| self.unit_volume(u)).sum()
    }

    fn check_partition(&self, p: &Partition) -> Result<()> {
        if p.kind() != self.unit_kind() {
            return Err(Error::InvalidPartition(format!(
                "partition labels {:?}s but domain partitions {:?}s",
                p.kind(),
                self.unit_kind()
            )));
        }
        if p.len() != self.unit_count() {
            return Err(Error::InvalidPartition(format!(
                "partition has {} labels for {} units",
                p.len(),
                self.unit_count()
            )));
        }
        Ok(())
    }

    /// Per-edge flag: does the edge lie on the interface Σ of `p`?
    fn interface_mask(&self, p: &Partition) -> Vec<bool> {
        (0..self.edges().len())
            .map(|e| match self.edge_units(e) {
                Some([u, w]) => p.side(u) != p.side(w),
                None => false,
            })
            .collect()
    }

    fn interface_edges(&self, p: &Partition) -> Vec<usize> {
        let mask = self.interface_mask(p);
        (0..mask.len()).filter(|&e| mask[e]).collect()
    }

    /// Vertices incident to an interface edge, ascending.
    fn interface_vertices(&self, p: &Partition) -> Vec<usize> {
        let mut on = vec![false; self.vertex_count()];
        for e in self.interface_edges(p) {
            let [a, b] = self.edges()[e];
            on[a] = true;
            on[b] = true;
        }
        (0..on.len()).filter(|&v| on[v]).collect()
    }

    fn partition_measures(&self, p: &Partition) -> Result<PartitionMeasures> {
        self.check_partition(p)?;
        let mut vol_a = 0.0;
        let mut vol_b = 0.0;
        for u in 0..self.unit_count() {
            match p.side(u) {
                Side::A => vol_a += self.unit_volume(u),
                Side::B => vol_b += self.unit_volume(u),
            }
        }
        let vol_sigma = self
            .interface_edges(p)
            .into_iter()
            .map(|e| self.edge_interface_measure(e))
            .sum();
        Ok(PartitionMeasures {
            vol_a,
            vol_b,
            vol_sigma,
        })
    }

    /// The side a vertex lies on, or `None` if it touches the interface.
    fn vertex_side(&self, p: &Partition, v: usize) -> Option<Side> {
        let mut side = None;
        for &u in self.vertex_units(v) {
            let s = p.side(u);
            match side {
                None => side = Some(s),
                Some(prev) if prev != s => return None,
                _ => {}
            }
        }
        side
    }
}
