//! Fixtures shared by the kernel benchmarks.

use cheeger_core::harness::random_connected_graph;
use cheeger_core::manifold::generators;
use cheeger_core::{Partition, SurfaceMesh, WeightedGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Icosphere with its equatorial face partition.
pub fn sphere(level: usize) -> (SurfaceMesh, Partition) {
    let mesh = generators::icosphere(level).expect("icosphere");
    let cut = generators::equator_cut(&mesh).expect("equator cut");
    (mesh, cut)
}

/// Unit flat torus on an `n × n` grid with a straight two-loop cut.
pub fn torus(n: usize) -> (SurfaceMesh, Partition) {
    let t = generators::flat_torus(n, n, 1.0, 1.0).expect("torus");
    let cut = t.straight_cut().expect("straight cut");
    (t.mesh, cut)
}

pub fn graph(n: usize, seed: u64) -> WeightedGraph {
    random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), n).expect("graph")
}
