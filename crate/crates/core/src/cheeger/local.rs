use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{BallMeter, Dijkstra, Domain, Partition, RegionMeasures};

/// `Vol(Σ∩B_x(3r)) · r · e^{3(n−1)√K r} / min(Vol(A∩B_x(r)), Vol(B∩B_x(r)))`,
/// `+∞` when either side misses the ball.
pub fn local_isoperimetric_ratio<D: Domain + ?Sized>(
    domain: &D,
    partition: &Partition,
    x: usize,
    r: f64,
    k: f64,
) -> Result<f64> {
    domain.check_partition(partition)?;
    if x >= domain.vertex_count() {
        return Err(Error::InvalidParams(format!("vertex {x} out of range")));
    }
    LocalRatioMeter::new(domain, partition, k)?.ratio(x, r)
}

/// Evaluates [`local_isoperimetric_ratio`] repeatedly against one partition.
pub struct LocalRatioMeter<'a, D: Domain + ?Sized> {
    meter: BallMeter<'a, D>,
    n: usize,
    k: f64,
}

impl<'a, D: Domain + ?Sized> LocalRatioMeter<'a, D> {
    pub fn new(domain: &'a D, partition: &'a Partition, k: f64) -> Result<Self> {
        domain.check_partition(partition)?;
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::InvalidParams(format!("curvature bound {k} must be >= 0")));
        }
        Ok(Self {
            meter: BallMeter::new(domain, Some(partition)),
            n: domain.dimension(),
            k,
        })
    }

    pub fn ratio(&mut self, x: usize, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParams(format!("radius {r} must be positive")));
        }
        let inner = self.meter.measure(x, r);
        let smaller = inner.vol_a.min(inner.vol_b);
        if smaller <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let outer = self.meter.measure(x, 3.0 * r);
        let growth = (3.0 * (self.n as f64 - 1.0) * self.k.sqrt() * r).exp();
        Ok(outer.vol_sigma * r * growth / smaller)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TildeClass {
    /// Ball evenly split, or a separating vertex between the other classes.
    Sigma,
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TildeDecomposition {
    pub classes: Vec<TildeClass>,
    pub r: f64,
    /// `Vol(A∩B_x(r)) − Vol(B∩B_x(r))` per vertex.
    pub imbalance: Vec<f64>,
    /// `Vol(B_x(r))` per vertex.
    pub ball_volume: Vec<f64>,
}

impl TildeDecomposition {
    pub fn members(&self, class: TildeClass) -> Vec<usize> {
        (0..self.classes.len()).filter(|&v| self.classes[v] == class).collect()
    }

    pub fn count(&self, class: TildeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }
}

/// Vertex classes by majority of the `r`-ball.
///
/// A vertex is in Ã (B̃) when side A (B) fills strictly more than half of
/// its ball, up to a relative tolerance of `1e-12`; otherwise in Σ̃. Every
/// edge joining Ã to B̃ additionally sends its less decided endpoint (smaller
/// `|imbalance| / volume`, ties to the lower id) to Σ̃, so Σ̃ separates Ã
/// from B̃ in the edge graph.
pub fn classify_tilde_sets<D: Domain + ?Sized>(
    domain: &D,
    partition: &Partition,
    r: f64,
) -> Result<TildeDecomposition> {
    domain.check_partition(partition)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParams(format!("radius {r} must be positive")));
    }
    let n = domain.vertex_count();
    let measures: Vec<RegionMeasures> = (0..n)
        .into_par_iter()
        .map_init(|| BallMeter::new(domain, Some(partition)), |m, v| m.measure(v, r))
        .collect();
    let imbalance: Vec<f64> = measures.iter().map(|m| m.vol_a - m.vol_b).collect();
    let ball_volume: Vec<f64> = measures.iter().map(|m| m.volume).collect();
    let mut classes: Vec<TildeClass> = (0..n)
        .map(|v| {
            let g = imbalance[v];
            if g.abs() <= 1e-12 * ball_volume[v] {
                TildeClass::Sigma
            } else if g > 0.0 {
                TildeClass::A
            } else {
                TildeClass::B
            }
        })
        .collect();
    let decidedness = |v: usize| imbalance[v].abs() / ball_volume[v];
    let mut promote = Vec::new();
    for &[a, b] in domain.edges() {
        let (ca, cb) = (classes[a], classes[b]);
        if ca == TildeClass::Sigma || cb == TildeClass::Sigma || ca == cb {
            continue;
        }
        let (da, db) = (decidedness(a), decidedness(b));
        promote.push(if da < db || (da == db && a < b) { a } else { b });
    }
    for v in promote {
        classes[v] = TildeClass::Sigma;
    }
    Ok(TildeDecomposition {
        classes,
        r,
        imbalance,
        ball_volume,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverResult {
    /// Centres in selection order: Σ̃ first, then B̃, then Ã.
    pub centers: Vec<usize>,
    /// Number of centres taken from Σ̃.
    pub s: usize,
    /// Number of centres taken from Σ̃ ∪ B̃.
    pub m: usize,
    pub k: usize,
    /// Largest number of `3r`-balls around centres containing one vertex.
    pub multiplicity: usize,
}

/// Greedy maximal `r`-separated net, scanning Σ̃, then B̃, then Ã, each in
/// ascending vertex order. A vertex becomes a centre unless some earlier
/// centre lies within distance `r`.
pub fn gromov_cover<D: Domain + ?Sized>(domain: &D, r: f64, decomposition: &TildeDecomposition) -> Result<CoverResult> {
    let n = domain.vertex_count();
    if decomposition.classes.len() != n {
        return Err(Error::InvalidParams("decomposition does not match the domain".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParams(format!("radius {r} must be positive")));
    }
    let mut covered = vec![false; n];
    let mut dj = Dijkstra::new(n);
    let mut centers = Vec::new();
    let mut bounds = [0usize; 3];
    for (i, class) in [TildeClass::Sigma, TildeClass::B, TildeClass::A]
        .into_iter()
        .enumerate()
    {
        for v in (0..n).filter(|&v| decomposition.classes[v] == class) {
            if covered[v] {
                continue;
            }
            centers.push(v);
            for &w in dj.run(domain, &[v], r) {
                covered[w] = true;
            }
        }
        bounds[i] = centers.len();
    }
    let chunk = centers.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
    let counts: Vec<u32> = centers
        .par_chunks(chunk)
        .map(|cs| {
            let mut dj = Dijkstra::new(n);
            let mut c = vec![0u32; n];
            for &p in cs {
                for &w in dj.run(domain, &[p], 3.0 * r) {
                    c[w] += 1;
                }
            }
            c
        })
        .reduce(
            || vec![0u32; n],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(CoverResult {
        k: centers.len(),
        centers,
        s: bounds[0],
        m: bounds[1],
        multiplicity: counts.iter().copied().max().unwrap_or(0) as usize,
    })
}
