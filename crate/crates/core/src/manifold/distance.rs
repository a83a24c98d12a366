use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Domain, Partition, RegionMeasures, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Entry {
    dist: f64,
    vertex: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// Reusable multi-source Dijkstra over edge lengths.
///
/// Only the vertices touched by the previous run are reset, so truncated
/// searches from many centres cost proportionally to the ball sizes.
#[derive(Debug, Clone)]
pub struct Dijkstra {
    dist: Vec<f64>,
    touched: Vec<usize>,
    settled: Vec<usize>,
    done: Vec<bool>,
    heap: BinaryHeap<Entry>,
}

impl Dijkstra {
    pub fn new(n: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; n],
            touched: Vec::new(),
            settled: Vec::new(),
            done: vec![false; n],
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
            self.done[v] = false;
        }
        self.touched.clear();
        self.settled.clear();
        self.heap.clear();
    }

    /// Settles every vertex with distance `≤ radius`; returns them in
    /// settling order.
    pub fn run<D: Domain + ?Sized>(&mut self, domain: &D, sources: &[usize], radius: f64) -> &[usize] {
        self.reset();
        for &s in sources {
            if self.dist[s] != 0.0 {
                self.dist[s] = 0.0;
                self.touched.push(s);
                self.heap.push(Entry { dist: 0.0, vertex: s });
            }
        }
        while let Some(Entry { dist, vertex }) = self.heap.pop() {
            if self.done[vertex] || dist > self.dist[vertex] {
                continue;
            }
            if dist > radius {
                break;
            }
            self.done[vertex] = true;
            self.settled.push(vertex);
            for nb in domain.neighbors(vertex) {
                let nd = dist + nb.length;
                if nd < self.dist[nb.vertex] {
                    if self.dist[nb.vertex] == f64::INFINITY {
                        self.touched.push(nb.vertex);
                    }
                    self.dist[nb.vertex] = nd;
                    self.heap.push(Entry {
                        dist: nd,
                        vertex: nb.vertex,
                    });
                }
            }
        }
        &self.settled
    }

    /// Distance from the last run (`+∞` if not settled within the radius).
    pub fn distance(&self, v: usize) -> f64 {
        if self.done[v] {
            self.dist[v]
        } else {
            f64::INFINITY
        }
    }

    pub fn settled(&self) -> &[usize] {
        &self.settled
    }
}

/// Per-vertex distance to a source set.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub values: Vec<f64>,
    /// Vertices that cannot be reached from the sources.
    pub unreachable: Vec<usize>,
}

impl DistanceField {
    pub fn max_finite(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max)
    }
}

/// Multi-source Dijkstra distance. Graph distances bound true geodesic
/// distances from above.
pub fn geodesic_distance<D: Domain + ?Sized>(domain: &D, sources: &[usize]) -> Result<DistanceField> {
    if sources.is_empty() {
        return Err(Error::InvalidParams("source set is empty".into()));
    }
    let n = domain.vertex_count();
    if let Some(&s) = sources.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidParams(format!("source {s} out of range")));
    }
    let mut dj = Dijkstra::new(n);
    dj.run(domain, sources, f64::INFINITY);
    let values: Vec<f64> = (0..n).map(|v| dj.distance(v)).collect();
    let unreachable = (0..n).filter(|&v| values[v].is_infinite()).collect();
    Ok(DistanceField { values, unreachable })
}

/// Closed metric ball `B_x(r)`: vertices within `r`, and the units (faces
/// or vertices) whose vertices all lie within `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub vertices: Vec<usize>,
    pub units: Vec<usize>,
    pub measures: RegionMeasures,
}

pub fn ball<D: Domain + ?Sized>(domain: &D, center: usize, r: f64, partition: Option<&Partition>) -> Result<Ball> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParams(format!("radius {r} must be >= 0")));
    }
    if center >= domain.vertex_count() {
        return Err(Error::InvalidParams(format!("center {center} out of range")));
    }
    if let Some(p) = partition {
        domain.check_partition(p)?;
    }
    let mut meter = BallMeter::new(domain, partition);
    let measures = meter.measure(center, r);
    let mut vertices = meter.dijkstra.settled().to_vec();
    vertices.sort_unstable();
    let mut units: Vec<usize> = vertices
        .iter()
        .flat_map(|&v| domain.vertex_units(v).iter().copied())
        .filter(|&u| domain.unit_vertices(u).iter().all(|&w| meter.inside[w] == meter.stamp))
        .collect();
    units.sort_unstable();
    units.dedup();
    Ok(Ball {
        vertices,
        units,
        measures,
    })
}

/// Repeated ball measurements against a fixed partition.
pub struct BallMeter<'a, D: Domain + ?Sized> {
    domain: &'a D,
    labels: Option<&'a [Side]>,
    interface: Vec<bool>,
    dijkstra: Dijkstra,
    inside: Vec<u32>,
    stamp: u32,
}

impl<'a, D: Domain + ?Sized> BallMeter<'a, D> {
    pub fn new(domain: &'a D, partition: Option<&'a Partition>) -> Self {
        let n = domain.vertex_count();
        let interface = match partition {
            Some(p) => domain.interface_mask(p),
            None => vec![false; domain.edges().len()],
        };
        Self {
            domain,
            labels: partition.map(|p| p.labels()),
            interface,
            dijkstra: Dijkstra::new(n),
            inside: vec![0; n],
            stamp: 0,
        }
    }

    pub fn measure(&mut self, center: usize, r: f64) -> RegionMeasures {
        self.dijkstra.run(self.domain, &[center], r);
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.inside.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
        let stamp = self.stamp;
        for &v in self.dijkstra.settled() {
            self.inside[v] = stamp;
        }
        // Accumulate in ascending vertex order so results do not depend on
        // the heap's settling order.
        let mut order = self.dijkstra.settled().to_vec();
        order.sort_unstable();
        let mut m = RegionMeasures::default();
        for &v in &order {
            for &u in self.domain.vertex_units(v) {
                let verts = self.domain.unit_vertices(u);
                let owner = verts.iter().copied().min().unwrap_or(v);
                if owner != v || !verts.iter().all(|&w| self.inside[w] == stamp) {
                    continue;
                }
                let vol = self.domain.unit_volume(u);
                m.volume += vol;
                if let Some(labels) = self.labels {
                    match labels[u] {
                        Side::A => m.vol_a += vol,
                        Side::B => m.vol_b += vol,
                    }
                }
            }
            for &e in self.domain.vertex_edges(v) {
                if !self.interface[e] {
                    continue;
                }
                let [a, b] = self.domain.edges()[e];
                let other = if a == v { b } else { a };
                if v < other && self.inside[other] == stamp {
                    m.vol_sigma += self.domain.edge_interface_measure(e);
                }
            }
        }
        m
    }

    pub fn dijkstra(&self) -> &Dijkstra {
        &self.dijkstra
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::WeightedGraph;

    #[test]
    fn path_graph_distances() {
        let g = WeightedGraph::path(5).unwrap();
        let d = geodesic_distance(&g, &[0]).unwrap();
        assert_eq!(d.values, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(d.unreachable.is_empty());
    }

    #[test]
    fn all_sources_give_zero() {
        let g = WeightedGraph::cycle(6).unwrap();
        let all: Vec<_> = (0..6).collect();
        assert!(geodesic_distance(&g, &all).unwrap().values.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn empty_sources_rejected() {
        let g = WeightedGraph::cycle(3).unwrap();
        assert!(geodesic_distance(&g, &[]).is_err());
    }

    #[test]
    fn graph_ball_measures() {
        let g = WeightedGraph::path(5).unwrap();
        let p = Partition::from_fn(
            super::super::UnitKind::Vertex,
            5,
            |v| if v < 2 { Side::A } else { Side::B },
        )
        .unwrap();
        let b0 = ball(&g, 2, 0.0, Some(&p)).unwrap();
        assert_eq!(b0.vertices, vec![2]);
        assert_eq!(b0.measures.volume, 1.0);
        let b1 = ball(&g, 2, 1.0, Some(&p)).unwrap();
        assert_eq!(b1.vertices, vec![1, 2, 3]);
        assert_eq!(b1.measures.vol_a, 1.0);
        assert_eq!(b1.measures.vol_b, 2.0);
        assert_eq!(b1.measures.vol_sigma, 1.0);
        let all = ball(&g, 0, 10.0, Some(&p)).unwrap();
        assert_eq!(all.measures.volume, 5.0);
    }
}
