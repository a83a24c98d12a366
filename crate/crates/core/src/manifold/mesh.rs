use std::collections::HashMap;

use super::{Csr, Domain, Laplacian, Neighbor, SparseSymmetric, UnitKind};
use crate::error::{Error, Result};

const NO_FACE: usize = usize::MAX;

/// Triangle mesh whose metric is given by its edge lengths.
///
/// Positions are optional: a flat torus has no isometric embedding in R³, so
/// every measure is computed from the intrinsic lengths alone.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    n_vertices: usize,
    faces: Vec<[usize; 3]>,
    positions: Option<Vec<[f64; 3]>>,
    edges: Vec<[usize; 2]>,
    edge_lengths: Vec<f64>,
    /// `face_edges[f][i]` is the edge opposite corner `i`.
    face_edges: Vec<[usize; 3]>,
    edge_faces: Vec<[usize; 2]>,
    face_areas: Vec<f64>,
    vertex_areas: Vec<f64>,
    neighbors: Csr<Neighbor>,
    vertex_edges: Csr<usize>,
    vertex_faces: Csr<usize>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Triangle area from side lengths (Kahan's stable Heron formula). Returns a
/// non-positive value when the triangle inequality fails.
pub(crate) fn triangle_area(l: [f64; 3]) -> f64 {
    let mut s = l;
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let q = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if q <= 0.0 {
        return q;
    }
    0.25 * q.sqrt()
}

/// Distance between the apexes `c`, `d` of two triangles on either side of
/// a shared base `ab` of length `l`, laid flat. `None` unless the segment
/// crosses the open base.
fn unfolded_distance(l: f64, ac: f64, bc: f64, ad: f64, bd: f64) -> Option<f64> {
    let apex = |p: f64, q: f64| -> (f64, f64) {
        let x = (l * l + p * p - q * q) / (2.0 * l);
        (x, (p * p - x * x).max(0.0).sqrt())
    };
    let (cx, cy) = apex(ac, bc);
    let (dx, dy) = apex(ad, bd);
    let dy = -dy;
    if !(cy > 0.0 && dy < 0.0) {
        return None;
    }
    let t = cy / (cy - dy);
    let x = cx + t * (dx - cx);
    let margin = 1e-9 * l;
    if x <= margin || x >= l - margin {
        return None;
    }
    Some(((cx - dx).powi(2) + (cy - dy).powi(2)).sqrt())
}

fn dist3(p: [f64; 3], q: [f64; 3]) -> f64 {
    let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

impl SurfaceMesh {
    /// Mesh with lengths taken from an embedding.
    pub fn from_positions(positions: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = positions.len();
        let pos = positions.clone();
        Self::build(n, faces, Some(positions), |a, b| dist3(pos[a], pos[b]))
    }

    /// Mesh with an intrinsic metric; `length(a, b)` is called once per edge.
    pub fn from_edge_lengths(
        n_vertices: usize,
        faces: Vec<[usize; 3]>,
        length: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        Self::build(n_vertices, faces, None, length)
    }

    fn build(
        n_vertices: usize,
        faces: Vec<[usize; 3]>,
        positions: Option<Vec<[f64; 3]>>,
        mut length: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::InvalidMesh("mesh has no faces".into()));
        }
        let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 2);
        let mut edges = Vec::new();
        let mut edge_faces: Vec<[usize; 2]> = Vec::new();
        let mut face_edges = Vec::with_capacity(faces.len());
        for (f, face) in faces.iter().enumerate() {
            if face.iter().any(|&v| v >= n_vertices) {
                return Err(Error::InvalidMesh(format!("face {f} references a vertex out of range")));
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(Error::InvalidMesh(format!("face {f} is degenerate")));
            }
            let mut fe = [0; 3];
            for i in 0..3 {
                let key = edge_key(face[(i + 1) % 3], face[(i + 2) % 3]);
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_faces.push([NO_FACE, NO_FACE]);
                    edges.len() - 1
                });
                let slot = &mut edge_faces[e];
                if slot[0] == NO_FACE {
                    slot[0] = f;
                } else if slot[1] == NO_FACE {
                    slot[1] = f;
                } else {
                    return Err(Error::NonManifold(format!(
                        "edge ({}, {}) belongs to more than two faces",
                        key.0, key.1
                    )));
                }
                fe[i] = e;
            }
            face_edges.push(fe);
        }

        let mut edge_lengths = Vec::with_capacity(edges.len());
        for &[a, b] in &edges {
            let l = length(a, b);
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidMesh(format!("edge ({a}, {b}) has length {l}")));
            }
            edge_lengths.push(l);
        }

        let mut face_areas = Vec::with_capacity(faces.len());
        let mut vertex_areas = vec![0.0; n_vertices];
        for (f, fe) in face_edges.iter().enumerate() {
            let l = [edge_lengths[fe[0]], edge_lengths[fe[1]], edge_lengths[fe[2]]];
            if !(l[0] < l[1] + l[2] && l[1] < l[0] + l[2] && l[2] < l[0] + l[1]) {
                return Err(Error::InvalidMesh(format!("face {f} violates the triangle inequality")));
            }
            let area = triangle_area(l);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!("face {f} has zero area")));
            }
            face_areas.push(area);
            for &v in &faces[f] {
                vertex_areas[v] += area / 3.0;
            }
        }
        if let Some(v) = vertex_areas.iter().position(|&a| !(a > 0.0)) {
            return Err(Error::InvalidMesh(format!("vertex {v} is not referenced by any face")));
        }

        let mut nbr_lists = vec![Vec::new(); n_vertices];
        let mut ve_lists = vec![Vec::new(); n_vertices];
        for (e, &[a, b]) in edges.iter().enumerate() {
            let length = edge_lengths[e];
            nbr_lists[a].push(Neighbor {
                vertex: b,
                edge: e,
                length,
                unfolded: false,
            });
            nbr_lists[b].push(Neighbor {
                vertex: a,
                edge: e,
                length,
                unfolded: false,
            });
            ve_lists[a].push(e);
            ve_lists[b].push(e);
        }
        // Across every interior edge whose two faces form a strictly convex
        // quad, link the opposite corners by the straight segment through
        // both faces. It is a surface path, so distances stay upper bounds.
        for (e, &[a, b]) in edges.iter().enumerate() {
            let [f, g] = edge_faces[e];
            if g == NO_FACE {
                continue;
            }
            let opposite = |f: usize| faces[f][(0..3).find(|&i| face_edges[f][i] == e).expect("edge of face")];
            let (c, d) = (opposite(f), opposite(g));
            if c == d || index.contains_key(&edge_key(c, d)) {
                continue;
            }
            let len = |x: usize, y: usize| edge_lengths[index[&edge_key(x, y)]];
            if let Some(length) = unfolded_distance(len(a, b), len(a, c), len(b, c), len(a, d), len(b, d)) {
                nbr_lists[c].push(Neighbor {
                    vertex: d,
                    edge: e,
                    length,
                    unfolded: true,
                });
                nbr_lists[d].push(Neighbor {
                    vertex: c,
                    edge: e,
                    length,
                    unfolded: true,
                });
            }
        }
        for l in &mut nbr_lists {
            l.sort_by(|x, y| x.vertex.cmp(&y.vertex).then(x.length.total_cmp(&y.length)));
        }
        let mut vf_lists = vec![Vec::new(); n_vertices];
        for (f, face) in faces.iter().enumerate() {
            for &v in face {
                vf_lists[v].push(f);
            }
        }

        Ok(Self {
            n_vertices,
            faces,
            positions,
            edges,
            edge_lengths,
            face_edges,
            edge_faces,
            face_areas,
            vertex_areas,
            neighbors: Csr::from_lists(nbr_lists),
            vertex_edges: Csr::from_lists(ve_lists),
            vertex_faces: Csr::from_lists(vf_lists),
        })
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn positions(&self) -> Option<&[[f64; 3]]> {
        self.positions.as_deref()
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_areas
    }

    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    /// Faces adjacent to an edge (one for boundary edges).
    pub fn edge_faces(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_faces[e].iter().copied().filter(|&f| f != NO_FACE)
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_faces[e][1] == NO_FACE
    }

    pub fn boundary_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.is_boundary_edge(e)).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.edge_faces.iter().all(|ef| ef[1] != NO_FACE)
    }

    pub fn total_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    /// Interior angle of face `f` at its corner `i`.
    pub fn corner_angle(&self, f: usize, i: usize) -> f64 {
        let fe = self.face_edges[f];
        let a = self.edge_lengths[fe[i]];
        let b = self.edge_lengths[fe[(i + 1) % 3]];
        let c = self.edge_lengths[fe[(i + 2) % 3]];
        ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos()
    }

    /// Maximum relative mismatch between stored lengths and the embedding.
    pub fn embedding_mismatch(&self) -> Option<f64> {
        let pos = self.positions.as_ref()?;
        Some(
            self.edges
                .iter()
                .zip(&self.edge_lengths)
                .map(|(&[a, b], &l)| (dist3(pos[a], pos[b]) - l).abs() / l)
                .fold(0.0, f64::max),
        )
    }

    /// Cotangent stiffness with lumped (barycentric) vertex areas as mass.
    fn cotangent_laplacian(&self) -> Laplacian {
        let mut weights = vec![0.0; self.edges.len()];
        for (f, fe) in self.face_edges.iter().enumerate() {
            let area = self.face_areas[f];
            let l2 = fe.map(|e| self.edge_lengths[e] * self.edge_lengths[e]);
            for i in 0..3 {
                // cot of the angle opposite edge i: (b² + c² − a²) / 4A
                let cot = (l2[(i + 1) % 3] + l2[(i + 2) % 3] - l2[i]) / (4.0 * area);
                weights[fe[i]] += 0.5 * cot;
            }
        }
        let stiffness = SparseSymmetric::from_edge_weights(self.n_vertices, &self.edges, &weights);
        Laplacian {
            stiffness,
            mass: self.vertex_areas.clone(),
        }
    }
}

impl Domain for SurfaceMesh {
    fn vertex_count(&self) -> usize {
        self.n_vertices
    }

    fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    fn neighbors(&self, v: usize) -> &[Neighbor] {
        self.neighbors.row(v)
    }

    fn vertex_edges(&self, v: usize) -> &[usize] {
        self.vertex_edges.row(v)
    }

    fn unit_kind(&self) -> UnitKind {
        UnitKind::Face
    }

    fn unit_count(&self) -> usize {
        self.faces.len()
    }

    fn unit_volume(&self, u: usize) -> f64 {
        self.face_areas[u]
    }

    fn unit_vertices(&self, u: usize) -> &[usize] {
        &self.faces[u]
    }

    fn vertex_units(&self, v: usize) -> &[usize] {
        self.vertex_faces.row(v)
    }

    fn edge_units(&self, e: usize) -> Option<[usize; 2]> {
        let [f, g] = self.edge_faces[e];
        (g != NO_FACE).then_some([f, g])
    }

    fn edge_interface_measure(&self, e: usize) -> f64 {
        self.edge_lengths[e]
    }

    fn vertex_masses(&self) -> &[f64] {
        &self.vertex_areas
    }

    fn laplacian(&self) -> Laplacian {
        self.cotangent_laplacian()
    }

    fn dimension(&self) -> usize {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral() -> SurfaceMesh {
        let h = 3f64.sqrt() / 2.0;
        SurfaceMesh::from_positions(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn single_equilateral_face() {
        let m = equilateral();
        assert!((m.total_area() - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert_eq!(m.boundary_edges().len(), 3);
        assert!(!m.is_closed());
        // Each edge gets ½·cot(π/3) from its only face.
        let lap = m.laplacian();
        let w = 0.5 / 3f64.sqrt();
        let dense = lap.stiffness.to_dense();
        for i in 0..3 {
            assert!((dense[(i, i)] - 2.0 * w).abs() < 1e-14);
            for j in 0..3 {
                if i != j {
                    assert!((dense[(i, j)] + w).abs() < 1e-14);
                }
            }
        }
        for a in m.vertex_areas() {
            assert!((a - 3f64.sqrt() / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_triangle_inequality_violation() {
        let r = SurfaceMesh::from_edge_lengths(3, vec![[0, 1, 2]], |a, b| if a + b == 1 { 3.0 } else { 1.0 });
        assert!(matches!(r, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rejects_non_manifold_edge() {
        let pos = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let r = SurfaceMesh::from_positions(pos, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]);
        assert!(matches!(r, Err(Error::NonManifold(_))));
    }

    #[test]
    fn rejects_unreferenced_vertex() {
        let pos = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [5.0, 5.0, 5.0]];
        assert!(SurfaceMesh::from_positions(pos, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn corner_angles_sum_to_pi() {
        let m = SurfaceMesh::from_positions(vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.3, 1.1, 0.0]], vec![[0, 1, 2]])
            .unwrap();
        let s: f64 = (0..3).map(|i| m.corner_angle(0, i)).sum();
        assert!((s - std::f64::consts::PI).abs() < 1e-14);
        assert_eq!(m.embedding_mismatch(), Some(0.0));
    }
}
