//! Model geometries: icosphere, flat torus, dumbbell, flat disk, spherical cap.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{Domain, Partition, Side, SurfaceMesh, UnitKind};
use crate::error::{Error, Result};

pub const MAX_ICOSPHERE_LEVEL: usize = 8;

fn normalize(p: [f64; 3]) -> [f64; 3] {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Unit-sphere triangulation by repeated midpoint subdivision of an
/// icosahedron with vertices at both poles. From level 1 on, the equator
/// `z = 0` is a cycle of mesh edges.
pub fn icosphere(subdivisions: usize) -> Result<SurfaceMesh> {
    if subdivisions > MAX_ICOSPHERE_LEVEL {
        return Err(Error::TooLarge(format!(
            "icosphere level {subdivisions} exceeds {MAX_ICOSPHERE_LEVEL}"
        )));
    }
    let zr = 1.0 / 5f64.sqrt();
    let rr = 2.0 / 5f64.sqrt();
    let mut pos = vec![[0.0, 0.0, 1.0]];
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0;
        pos.push([rr * a.cos(), rr * a.sin(), zr]);
    }
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0 + PI / 5.0;
        pos.push([rr * a.cos(), rr * a.sin(), -zr]);
    }
    pos.push([0.0, 0.0, -1.0]);
    let up = |k: usize| 1 + k % 5;
    let lo = |k: usize| 6 + k % 5;
    let mut faces = Vec::with_capacity(20);
    for k in 0..5 {
        faces.push([0, up(k), up(k + 1)]);
        faces.push([up(k), lo(k), up(k + 1)]);
        faces.push([up(k + 1), lo(k), lo(k + 1)]);
        faces.push([11, lo(k + 1), lo(k)]);
    }
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, pos: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let (p, q) = (pos[a], pos[b]);
                let mut m = normalize([(p[0] + q[0]) * 0.5, (p[1] + q[1]) * 0.5, (p[2] + q[2]) * 0.5]);
                if p[2] == -q[2] {
                    m[2] = 0.0;
                }
                pos.push(m);
                pos.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut pos);
            let bc = mid(b, c, &mut pos);
            let ca = mid(c, a, &mut pos);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    // Outward orientation.
    for f in &mut faces {
        let n = cross(sub(pos[f[1]], pos[f[0]]), sub(pos[f[2]], pos[f[0]]));
        if dot(n, pos[f[0]]) < 0.0 {
            f.swap(1, 2);
        }
    }
    SurfaceMesh::from_positions(pos, faces)
}

/// Faces whose centroid satisfies `in_a` go to side A.
pub fn partition_by_centroid(mesh: &SurfaceMesh, mut in_a: impl FnMut([f64; 3]) -> bool) -> Result<Partition> {
    let pos = mesh
        .positions()
        .ok_or_else(|| Error::InvalidMesh("centroid partition needs vertex positions".into()))?;
    Partition::from_fn(UnitKind::Face, mesh.unit_count(), |f| {
        let [a, b, c] = mesh.faces()[f];
        let g = [0, 1, 2].map(|i| (pos[a][i] + pos[b][i] + pos[c][i]) / 3.0);
        if in_a(g) {
            Side::A
        } else {
            Side::B
        }
    })
}

/// Northern faces (`z > 0`) on side A.
pub fn equator_cut(mesh: &SurfaceMesh) -> Result<Partition> {
    partition_by_centroid(mesh, |g| g[2] > 0.0)
}

/// Vertex of largest `z`.
pub fn north_pole(mesh: &SurfaceMesh) -> Option<usize> {
    let pos = mesh.positions()?;
    (0..pos.len()).max_by(|&a, &b| pos[a][2].total_cmp(&pos[b][2]))
}

/// Flat torus `[0, Lx) × [0, Ly)` on an `nx × ny` periodic grid, two
/// triangles per cell. Intrinsic metric only.
#[derive(Debug, Clone)]
pub struct FlatTorus {
    pub mesh: SurfaceMesh,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl FlatTorus {
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        (i % self.nx) + self.nx * (j % self.ny)
    }

    pub fn coords(&self, v: usize) -> (f64, f64) {
        let (i, j) = (v % self.nx, v / self.nx);
        (i as f64 * self.lx / self.nx as f64, j as f64 * self.ly / self.ny as f64)
    }

    /// Grid column `i` of face `f`: faces `2(i + nx·j)` and `2(i + nx·j) + 1`
    /// fill cell `(i, j)`.
    pub fn face_cell(&self, f: usize) -> (usize, usize) {
        let cell = f / 2;
        (cell % self.nx, cell / self.nx)
    }

    /// Cut along the two circles `x = 0` and `x = Lx/2`.
    pub fn straight_cut(&self) -> Result<Partition> {
        let half = self.nx / 2;
        Partition::from_fn(UnitKind::Face, self.mesh.unit_count(), |f| {
            if self.face_cell(f).0 < half {
                Side::A
            } else {
                Side::B
            }
        })
    }
}

pub fn flat_torus(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<FlatTorus> {
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidParams(format!("torus grid {nx}×{ny} needs nx, ny >= 3")));
    }
    if !(lx > 0.0) || !(ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
        return Err(Error::InvalidParams(format!(
            "torus side lengths {lx}, {ly} must be positive"
        )));
    }
    let vid = |i: usize, j: usize| (i % nx) + nx * (j % ny);
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v11 = vid(i + 1, j + 1);
            let v01 = vid(i, j + 1);
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    let (hx, hy) = (lx / nx as f64, ly / ny as f64);
    let wrap = |d: usize, n: usize| -> f64 {
        if d == 0 {
            0.0
        } else if d == 1 || d == n - 1 {
            1.0
        } else {
            d as f64
        }
    };
    let mesh = SurfaceMesh::from_edge_lengths(nx * ny, faces, |a, b| {
        let di = (a % nx).abs_diff(b % nx);
        let dj = (a / nx).abs_diff(b / nx);
        let (dx, dy) = (wrap(di, nx) * hx, wrap(dj, ny) * hy);
        (dx * dx + dy * dy).sqrt()
    })?;
    Ok(FlatTorus { mesh, nx, ny, lx, ly })
}

/// Surface of revolution around the z-axis. `profile` lists `(radius, z)`;
/// a radius of exactly 0 is a pole (only allowed at either end).
fn revolve(profile: &[(f64, f64)], segments: usize) -> Result<SurfaceMesh> {
    let mut pos = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::with_capacity(profile.len());
    for (k, &(r, z)) in profile.iter().enumerate() {
        if r == 0.0 {
            if k != 0 && k != profile.len() - 1 {
                return Err(Error::InvalidMesh("pole in the middle of a profile".into()));
            }
            pos.push([0.0, 0.0, z]);
            rings.push(vec![pos.len() - 1]);
        } else {
            let ring = (0..segments)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 / segments as f64;
                    pos.push([r * a.cos(), r * a.sin(), z]);
                    pos.len() - 1
                })
                .collect();
            rings.push(ring);
        }
    }
    let mut faces = Vec::new();
    for w in rings.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        match (lo.len(), hi.len()) {
            (1, 1) => return Err(Error::InvalidMesh("profile has two consecutive poles".into())),
            (1, m) => {
                for j in 0..m {
                    faces.push([lo[0], hi[j], hi[(j + 1) % m]]);
                }
            }
            (m, 1) => {
                for j in 0..m {
                    faces.push([lo[(j + 1) % m], lo[j], hi[0]]);
                }
            }
            (m, _) => {
                for j in 0..m {
                    let (a, b) = (lo[j], lo[(j + 1) % m]);
                    let (c, d) = (hi[(j + 1) % m], hi[j]);
                    faces.push([a, b, c]);
                    faces.push([a, c, d]);
                }
            }
        }
    }
    SurfaceMesh::from_positions(pos, faces)
}

/// Two unit-sphere lobes joined by a cylindrical neck of length 1.
#[derive(Debug, Clone)]
pub struct Dumbbell {
    pub mesh: SurfaceMesh,
    pub neck_scale: f64,
    pub neck_radius: f64,
    /// Length of the polygonal neck circle at `z = 0`.
    pub neck_cut_length: f64,
    pub segments: usize,
}

impl Dumbbell {
    /// The neck circle `z = 0`; side A is the lower lobe.
    pub fn neck_cut(&self) -> Result<Partition> {
        partition_by_centroid(&self.mesh, |g| g[2] < 0.0)
    }
}

/// Segments around the axis for a revolution mesh at the given level.
pub fn revolution_segments(subdivisions: usize) -> usize {
    16 << subdivisions
}

/// Dumbbell with neck radius `neck_scale` (lobes have radius 1). At
/// `neck_scale = 1` the shape is a capsule.
pub fn dumbbell(neck_scale: f64, subdivisions: usize) -> Result<Dumbbell> {
    if !(neck_scale > 0.0 && neck_scale <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "neck_scale {neck_scale} must lie in (0, 1]"
        )));
    }
    if subdivisions > 5 {
        return Err(Error::TooLarge(format!("dumbbell level {subdivisions} exceeds 5")));
    }
    let m = revolution_segments(subdivisions);
    let ds = 2.0 * PI / m as f64;
    let a = neck_scale;
    if a < 0.5 * ds {
        return Err(Error::InvalidParams(format!(
            "neck radius {a} is thinner than the mesh resolution {ds:.4}"
        )));
    }
    // Lower lobe centred at z = −c; its inner circle of radius a sits at
    // z = −1/2, where the neck starts.
    let c = (1.0 - a * a).sqrt() + 0.5;
    let phi_end = PI - a.asin();
    let half = phi_end + 0.5;
    let steps = ((half / ds).ceil() as usize).max(2);
    let point = |s: f64| -> (f64, f64) {
        if s <= phi_end {
            (s.sin(), -c - s.cos())
        } else {
            (a, -0.5 + (s - phi_end))
        }
    };
    let mut lower: Vec<(f64, f64)> = (0..steps).map(|i| point(half * i as f64 / steps as f64)).collect();
    lower[0] = (0.0, -c - 1.0);
    let mut profile = lower.clone();
    profile.push((a, 0.0));
    profile.extend(lower.iter().rev().map(|&(r, z)| (r, -z)));
    let mesh = revolve(&profile, m)?;
    let neck_cut_length = m as f64 * 2.0 * a * (PI / m as f64).sin();
    Ok(Dumbbell {
        mesh,
        neck_scale,
        neck_radius: a,
        neck_cut_length,
        segments: m,
    })
}

/// Flat unit disk: a centre vertex and `rings` concentric rings, ring `k`
/// carrying `6k` vertices.
pub fn flat_disk(rings: usize) -> Result<SurfaceMesh> {
    if rings == 0 {
        return Err(Error::InvalidParams("disk needs at least one ring".into()));
    }
    let mut pos = vec![[0.0, 0.0, 0.0]];
    let mut ring_ids: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..=rings {
        let r = k as f64 / rings as f64;
        let count = 6 * k;
        let ids = (0..count)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / count as f64;
                pos.push([r * a.cos(), r * a.sin(), 0.0]);
                pos.len() - 1
            })
            .collect();
        ring_ids.push(ids);
    }
    let mut faces = Vec::new();
    for k in 1..=rings {
        let (inner, outer) = (&ring_ids[k - 1], &ring_ids[k]);
        if inner.len() == 1 {
            for j in 0..outer.len() {
                faces.push([inner[0], outer[j], outer[(j + 1) % outer.len()]]);
            }
            continue;
        }
        // March both rings by angle; ring k has 6 more vertices than ring k−1.
        let (ni, no) = (inner.len(), outer.len());
        let (mut i, mut o) = (0usize, 0usize);
        while i < ni || o < no {
            let ai = (i + 1) as f64 / ni as f64;
            let ao = (o + 1) as f64 / no as f64;
            if o < no && (i >= ni || ao <= ai) {
                faces.push([inner[i % ni], outer[o], outer[(o + 1) % no]]);
                o += 1;
            } else {
                faces.push([inner[i], outer[o % no], inner[(i + 1) % ni]]);
                i += 1;
            }
        }
    }
    SurfaceMesh::from_positions(pos, faces)
}

/// Geodesic cap `{polar angle ≤ theta}` of the unit sphere on a
/// latitude/longitude grid.
pub fn spherical_cap(theta: f64, rings: usize, segments: usize) -> Result<SurfaceMesh> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::InvalidParams(format!("cap angle {theta} must lie in (0, π)")));
    }
    if rings < 1 || segments < 3 {
        return Err(Error::InvalidParams("cap needs rings >= 1 and segments >= 3".into()));
    }
    let profile: Vec<(f64, f64)> = (0..=rings)
        .map(|k| {
            if k == 0 {
                return (0.0, 1.0);
            }
            let phi = theta * k as f64 / rings as f64;
            let z = if (phi - PI / 2.0).abs() < 1e-15 { 0.0 } else { phi.cos() };
            (phi.sin(), z)
        })
        .collect();
    // Pole first: reverse so the boundary ring is last is already the case.
    revolve(&profile, segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        let m0 = icosphere(0).unwrap();
        assert_eq!((m0.vertex_count(), m0.faces().len()), (12, 20));
        let m1 = icosphere(1).unwrap();
        assert_eq!((m1.vertex_count(), m1.faces().len()), (42, 80));
        assert!(m1.is_closed());
        assert!(icosphere(9).is_err());
    }

    #[test]
    fn icosphere_area_converges() {
        let m = icosphere(4).unwrap();
        let rel = (m.total_area() - 4.0 * PI).abs() / (4.0 * PI);
        assert!(rel < 0.005, "{rel}");
        assert!(m.embedding_mismatch().unwrap() < 1e-12);
    }

    #[test]
    fn icosphere_equator_is_edge_cycle() {
        let m = icosphere(2).unwrap();
        let p = equator_cut(&m).unwrap();
        let meas = m.partition_measures(&p).unwrap();
        // 20 equally spaced equator edges.
        assert_eq!(m.interface_edges(&p).len(), 20);
        assert!((meas.vol_sigma - 40.0 * (PI / 20.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn torus_area_and_counts() {
        let t = flat_torus(16, 16, 1.0, 1.0).unwrap();
        assert!((t.mesh.total_area() - 1.0).abs() < 1e-12);
        assert!(t.mesh.is_closed());
        let small = flat_torus(3, 3, 2.0, 1.5).unwrap();
        assert_eq!(small.mesh.faces().len(), 18);
        assert!((small.mesh.total_area() - 3.0).abs() < 1e-12);
        assert!(flat_torus(2, 5, 1.0, 1.0).is_err());
        assert!(flat_torus(4, 4, 0.0, 1.0).is_err());
    }

    #[test]
    fn torus_straight_cut_is_two_circles() {
        let t = flat_torus(8, 8, 1.0, 1.0).unwrap();
        let p = t.straight_cut().unwrap();
        let m = t.mesh.partition_measures(&p).unwrap();
        assert!((m.vol_sigma - 2.0).abs() < 1e-12);
        assert!((m.ratio() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn dumbbell_shape() {
        let d = dumbbell(0.3, 1).unwrap();
        assert!(d.mesh.is_closed());
        assert!((d.neck_cut_length - 2.0 * PI * 0.3).abs() < 0.01);
        let p = d.neck_cut().unwrap();
        let m = d.mesh.partition_measures(&p).unwrap();
        assert!((m.vol_sigma - d.neck_cut_length).abs() < 1e-12);
        assert!((m.vol_a - m.vol_b).abs() < 1e-9 * m.vol_a);
        assert!(dumbbell(0.0, 1).is_err());
        assert!(dumbbell(0.01, 1).is_err());
    }

    #[test]
    fn capsule_limit() {
        let d = dumbbell(1.0, 2).unwrap();
        // Two hemispheres plus a unit-length cylinder of radius 1.
        let area = 4.0 * PI + 2.0 * PI;
        assert!((d.mesh.total_area() - area).abs() / area < 0.01);
    }

    #[test]
    fn disk_and_cap() {
        let d = flat_disk(10).unwrap();
        assert!((d.total_area() - PI).abs() / PI < 0.02);
        assert_eq!(d.boundary_edges().len(), 60);
        let c = spherical_cap(PI / 2.0, 16, 32).unwrap();
        assert!((c.total_area() - 2.0 * PI).abs() / (2.0 * PI) < 0.01);
        assert_eq!(c.boundary_edges().len(), 32);
    }
}
