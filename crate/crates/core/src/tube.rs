//! Signed distance to an interface, tubes around it, level-set volume
//! profiles, the tube growth inequality and the boundary-ratio bound for
//! surfaces with boundary.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{geodesic_distance, Dijkstra, Domain, Partition, Side, SurfaceMesh};

/// Distance to the interface, positive on side A and negative on side B.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDistanceField {
    pub values: Vec<f64>,
    pub partition: Partition,
    /// Vertices incident to an interface edge; `ρ = 0` there.
    pub seeds: Vec<usize>,
}

impl SignedDistanceField {
    pub fn abs(&self, v: usize) -> f64 {
        self.values[v].abs()
    }
}

pub fn signed_distance<D: Domain + ?Sized>(domain: &D, partition: &Partition) -> Result<SignedDistanceField> {
    domain.check_partition(partition)?;
    let seeds = domain.interface_vertices(partition);
    if seeds.is_empty() {
        return Err(Error::EmptyInterface);
    }
    let dist = geodesic_distance(domain, &seeds)?;
    let values = (0..domain.vertex_count())
        .map(|v| match domain.vertex_side(partition, v) {
            _ if dist.values[v] == 0.0 => 0.0,
            Some(Side::B) => -dist.values[v],
            _ => dist.values[v],
        })
        .collect();
    Ok(SignedDistanceField {
        values,
        partition: partition.clone(),
        seeds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSet {
    pub vertices: Vec<usize>,
    /// Units with every vertex in the tube.
    pub units: Vec<usize>,
    pub volume: f64,
}

/// `{x : |ρ(x)| ≤ t}`.
pub fn tube_set<D: Domain + ?Sized>(domain: &D, field: &SignedDistanceField, t: f64) -> Result<TubeSet> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParams(format!("tube radius {t} must be >= 0")));
    }
    let inside: Vec<bool> = field.values.iter().map(|r| r.abs() <= t).collect();
    let vertices = (0..inside.len()).filter(|&v| inside[v]).collect();
    let units: Vec<usize> = (0..domain.unit_count())
        .filter(|&u| domain.unit_vertices(u).iter().all(|&v| inside[v]))
        .collect();
    let volume = units.iter().map(|&u| domain.unit_volume(u)).sum();
    Ok(TubeSet {
        vertices,
        units,
        volume,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSide {
    Positive,
    Negative,
}

impl ProfileSide {
    fn side(self) -> Side {
        match self {
            ProfileSide::Positive => Side::A,
            ProfileSide::Negative => Side::B,
        }
    }
}

/// Volumes between level sets of `|ρ|` on one side of the interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeProfile {
    /// Bin edges `a_0 = 0 < … < a_B`.
    pub edges: Vec<f64>,
    /// `V(a_i, a_{i+1})`.
    pub bin_volumes: Vec<f64>,
    /// Level-set measure estimate at each bin edge; `f[0] = Vol(Σ)`.
    pub f: Vec<f64>,
    /// `V(0, a_i)` at each bin edge.
    pub cumulative: Vec<f64>,
}

impl TubeProfile {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn f0(&self) -> f64 {
        self.f[0]
    }

    /// CSV with columns `a,f,V0a`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,f,V0a\n");
        for i in 0..self.edges.len() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e}",
                self.edges[i], self.f[i], self.cumulative[i]
            )
            .unwrap();
        }
        out
    }
}

/// Fraction of a unit where the linear interpolant of `vals` is at most `a`.
/// One value is a point mass, three span a triangle.
fn sublevel_fraction(vals: &[f64], a: f64) -> f64 {
    match *vals {
        [v] => f64::from(v <= a),
        [x, y] => {
            let (lo, hi) = (x.min(y), x.max(y));
            if a >= hi {
                1.0
            } else if a < lo {
                0.0
            } else {
                (a - lo) / (hi - lo)
            }
        }
        [x, y, z] => {
            let mut d = [x, y, z];
            d.sort_by(f64::total_cmp);
            let [d0, d1, d2] = d;
            if a >= d2 {
                1.0
            } else if a <= d0 {
                0.0
            } else if a <= d1 {
                (a - d0) * (a - d0) / ((d1 - d0) * (d2 - d0))
            } else {
                1.0 - (d2 - a) * (d2 - a) / ((d2 - d0) * (d2 - d1))
            }
        }
        _ => {
            let inside = vals.iter().filter(|&&v| v <= a).count();
            inside as f64 / vals.len() as f64
        }
    }
}

/// Volumes between level sets of the piecewise-linear interpolant of `|ρ|`
/// over the units of one side. `f` is a centred difference of the bin
/// volumes, except `f(0) = Vol(Σ)`.
pub fn level_profile<D: Domain + ?Sized>(
    domain: &D,
    field: &SignedDistanceField,
    bins: usize,
    side: ProfileSide,
) -> Result<TubeProfile> {
    if bins < 4 {
        return Err(Error::InvalidParams(format!("need at least 4 bins, got {bins}")));
    }
    let p = &field.partition;
    domain.check_partition(p)?;
    let want = side.side();
    let units: Vec<(usize, Vec<f64>)> = (0..domain.unit_count())
        .filter(|&u| p.side(u) == want)
        .map(|u| (u, domain.unit_vertices(u).iter().map(|&v| field.abs(v)).collect()))
        .collect();
    if units.is_empty() {
        return Err(Error::InvalidPartition(format!("side {want:?} is empty")));
    }
    let a_max = units
        .iter()
        .flat_map(|(_, vals)| vals.iter().copied())
        .fold(0.0, f64::max);
    if !(a_max > 0.0) {
        return Err(Error::Data("distance field vanishes on the whole side".into()));
    }
    let w = a_max / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|i| i as f64 * w).collect();
    edges[bins] = a_max;
    let mut bin_volumes = vec![0.0; bins];
    for (u, vals) in &units {
        let vol = domain.unit_volume(*u);
        let mut below = sublevel_fraction(vals, 0.0);
        for i in 0..bins {
            let next = sublevel_fraction(vals, edges[i + 1]);
            // Mass sitting exactly at 0 goes to the first bin.
            let lower = if i == 0 { 0.0 } else { below };
            bin_volumes[i] += vol * (next - lower);
            below = next;
        }
    }
    let mut cumulative = Vec::with_capacity(bins + 1);
    cumulative.push(0.0);
    for i in 0..bins {
        cumulative.push(cumulative[i] + bin_volumes[i]);
    }
    let sigma = domain.partition_measures(p)?.vol_sigma;
    let mut f = Vec::with_capacity(bins + 1);
    f.push(sigma);
    for i in 1..bins {
        f.push((bin_volumes[i - 1] + bin_volumes[i]) / (2.0 * w));
    }
    f.push(bin_volumes[bins - 1] / w);
    Ok(TubeProfile {
        edges,
        bin_volumes,
        f,
        cumulative,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub c: f64,
    /// Smallest `f(0)·B(t) − V(0,t)` over the grid, where `B(t) = t` for
    /// `C = 0` and `e^{Ct}/C` otherwise.
    pub worst_margin: f64,
    pub worst_t: f64,
    /// Two bin widths of volume along the interface: `2·w·f(0)`.
    pub slack: f64,
    pub violations: usize,
    pub pass: bool,
}

/// Checks `f(0)/V(0,t) ≥ C e^{−Ct}` (or `≥ 1/t` when `C = 0`) at every bin
/// edge `t > 0`, allowing the discretisation slack.
pub fn tube_growth_check(profile: &TubeProfile, c: f64) -> Result<GrowthReport> {
    if !(c >= 0.0) || c.is_nan() {
        return Err(Error::InvalidParams(format!("envelope constant {c} must be >= 0")));
    }
    let f0 = profile.f0();
    let slack = 2.0 * profile.bin_width() * f0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_t = 0.0;
    let mut violations = 0;
    for i in 1..profile.edges.len() {
        let t = profile.edges[i];
        let v = profile.cumulative[i];
        let allowed = if c < 1e-14 { f0 * t } else { f0 * ((c * t).exp() / c) };
        let margin = allowed - v;
        if margin < worst_margin {
            worst_margin = margin;
            worst_t = t;
        }
        if margin < -slack {
            violations += 1;
        }
    }
    Ok(GrowthReport {
        c,
        worst_margin,
        worst_t,
        slack,
        violations,
        pass: violations == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRatioReport {
    pub boundary_length: f64,
    pub area: f64,
    /// `Vol(∂M) / Vol(M)`.
    pub ratio: f64,
    /// `Σ_v max{κ_g(v), (n−1)√K} · ℓ*(v)` over boundary vertices.
    pub c0: f64,
    pub diameter: f64,
    /// `C₀ e^{−C₀ D}`.
    pub bound: f64,
    /// `1/D`, the `C₀ → 0` form.
    pub limit_bound: f64,
    pub pass: bool,
    pub boundary_vertices: usize,
}

/// Per boundary vertex: geodesic curvature (turning angle over dual length,
/// positive where the boundary is convex) and the dual length.
pub fn boundary_curvature(mesh: &SurfaceMesh) -> Vec<(usize, f64, f64)> {
    let n = mesh.vertex_count();
    let mut dual = vec![0.0; n];
    let mut on = vec![false; n];
    for e in mesh.boundary_edges() {
        let [a, b] = mesh.edges()[e];
        let l = mesh.edge_lengths()[e];
        dual[a] += 0.5 * l;
        dual[b] += 0.5 * l;
        on[a] = true;
        on[b] = true;
    }
    let mut angle = vec![0.0; n];
    for (f, face) in mesh.faces().iter().enumerate() {
        for (i, &v) in face.iter().enumerate() {
            if on[v] {
                angle[v] += mesh.corner_angle(f, i);
            }
        }
    }
    (0..n)
        .filter(|&v| on[v])
        .map(|v| (v, (PI - angle[v]) / dual[v], dual[v]))
        .collect()
}

/// Largest pairwise edge-graph distance.
pub fn graph_diameter<D: Domain + ?Sized>(domain: &D) -> f64 {
    let n = domain.vertex_count();
    (0..n)
        .into_par_iter()
        .map_init(
            || Dijkstra::new(n),
            |dj, s| {
                dj.run(domain, &[s], f64::INFINITY);
                dj.settled().iter().map(|&v| dj.distance(v)).fold(0.0, f64::max)
            },
        )
        .reduce(|| 0.0, f64::max)
}

/// Compares `Vol(∂M)/Vol(M)` with `C₀ e^{−C₀ D}` on a surface with boundary.
pub fn boundary_ratio_bound(mesh: &SurfaceMesh, k: f64) -> Result<BoundaryRatioReport> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidParams(format!("curvature bound {k} must be >= 0")));
    }
    if mesh.is_closed() {
        return Err(Error::InvalidMesh("mesh has no boundary".into()));
    }
    let floor = (mesh.dimension() as f64 - 1.0) * k.sqrt();
    let curv = boundary_curvature(mesh);
    let c0: f64 = curv.iter().map(|&(_, kg, len)| kg.max(floor) * len).sum();
    let boundary_length: f64 = mesh.boundary_edges().iter().map(|&e| mesh.edge_lengths()[e]).sum();
    let area = mesh.total_area();
    let ratio = boundary_length / area;
    let diameter = graph_diameter(mesh);
    let bound = c0 * (-c0 * diameter).exp();
    let limit_bound = 1.0 / diameter;
    let pass = if c0.abs() < 1e-14 {
        ratio >= limit_bound
    } else {
        ratio >= bound
    };
    Ok(BoundaryRatioReport {
        boundary_length,
        area,
        ratio,
        c0,
        diameter,
        bound,
        limit_bound,
        pass,
        boundary_vertices: curv.len(),
    })
}
