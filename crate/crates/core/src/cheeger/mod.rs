//! Cheeger constants and the constructive upper bound on `λ₁`.
//!
//! [`cheeger_exact`] enumerates every bipartition of a small graph;
//! [`cheeger_sweep`] thresholds a vertex function. The remaining pieces
//! ([`local_isoperimetric_ratio`], [`classify_tilde_sets`], [`gromov_cover`],
//! [`buser_test_function`]) build a test function whose Rayleigh quotient
//! bounds `λ₁` from above, assembled by [`verify_buser`].

mod buser;
mod local;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use buser::{buser_test_function, diameter_lower_bound, verify_buser, BuserFunction, BuserReport};
pub use local::{
    classify_tilde_sets, gromov_cover, local_isoperimetric_ratio, CoverResult, LocalRatioMeter, TildeClass,
    TildeDecomposition,
};

use crate::error::{Error, Result};
use crate::manifold::{Domain, Partition, PartitionMeasures, Side, UnitKind, WeightedGraph};
use crate::spectral::EigenCluster;

/// Enumeration budget of [`cheeger_exact`].
pub const MAX_EXACT_VERTICES: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheegerMethod {
    Exact,
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheegerResult {
    pub h: f64,
    pub partition: Partition,
    pub measures: PartitionMeasures,
    pub method: CheegerMethod,
}

/// `true` if bitset `a`, read as a sorted vertex list, precedes `b`.
fn lex_less(a: u32, b: u32) -> bool {
    let x = a ^ b;
    if x == 0 {
        return false;
    }
    let d = x.trailing_zeros();
    let (with, without) = if a & (1 << d) != 0 { (a, b) } else { (b, a) };
    let rest = if d + 1 >= 32 { 0 } else { without >> (d + 1) };
    let with_first = rest != 0;
    (with == a) == with_first
}

/// Exact Cheeger constant of a graph by enumerating all `2^{n−1} − 1`
/// bipartitions. Ties go to the lexicographically smallest side A.
pub fn cheeger_exact(graph: &WeightedGraph) -> Result<CheegerResult> {
    let n = graph.vertex_count();
    if n > MAX_EXACT_VERTICES {
        return Err(Error::TooLarge(format!(
            "exact enumeration needs at most {MAX_EXACT_VERTICES} vertices, got {n}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidGraph("need at least two vertices".into()));
    }
    let edges: Vec<(u32, u32, f64)> = graph
        .edges()
        .iter()
        .zip(graph.conductances())
        .map(|(&[a, b], &c)| (1u32 << a, 1u32 << b, c))
        .collect();
    let weights = graph.weights();
    let total: f64 = weights.iter().sum();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    // Vertex 0 always lies in A: the smaller side lexicographically.
    let count = 1u32 << (n - 1);
    let eval = |mb: u32| -> (f64, u32) {
        let b = mb << 1;
        let a = full & !b;
        let mut cut = 0.0;
        for &(x, y, c) in &edges {
            if (a & x != 0) != (a & y != 0) {
                cut += c;
            }
        }
        let vol_a: f64 = (0..n).filter(|&v| a & (1 << v) != 0).map(|v| weights[v]).sum();
        (cut / vol_a.min(total - vol_a), a)
    };
    let better = |x: (f64, u32), y: (f64, u32)| -> (f64, u32) {
        match x.0.total_cmp(&y.0) {
            std::cmp::Ordering::Less => x,
            std::cmp::Ordering::Greater => y,
            std::cmp::Ordering::Equal => {
                if lex_less(x.1, y.1) {
                    x
                } else {
                    y
                }
            }
        }
    };
    let (_, mask) = (1..count)
        .into_par_iter()
        .map(eval)
        .reduce(|| (f64::INFINITY, full), better);
    let partition = Partition::from_fn(UnitKind::Vertex, n, |v| {
        if mask & (1 << v) != 0 {
            Side::A
        } else {
            Side::B
        }
    })?;
    let measures = graph.partition_measures(&partition)?;
    Ok(CheegerResult {
        h: measures.ratio(),
        partition,
        measures,
        method: CheegerMethod::Exact,
    })
}

/// Edges separating each unit from its neighbours.
fn unit_edges<D: Domain + ?Sized>(domain: &D) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); domain.unit_count()];
    for e in 0..domain.edges().len() {
        if let Some([u, w]) = domain.edge_units(e) {
            out[u].push(e);
            out[w].push(e);
        }
    }
    out
}

/// Reusable sweep over one domain.
pub struct Sweeper<'a, D: Domain + ?Sized> {
    domain: &'a D,
    unit_edges: Vec<Vec<usize>>,
    volumes: Vec<f64>,
    total: f64,
}

impl<'a, D: Domain + ?Sized> Sweeper<'a, D> {
    pub fn new(domain: &'a D) -> Self {
        let volumes: Vec<f64> = (0..domain.unit_count()).map(|u| domain.unit_volume(u)).collect();
        let total = volumes.iter().sum();
        Self {
            domain,
            unit_edges: unit_edges(domain),
            volumes,
            total,
        }
    }

    /// Best threshold cut of units sorted by their mean vertex value: the
    /// ratio from the incremental scan and the side-A labels. Only prefixes
    /// ending between two distinct values count.
    fn best_prefix(&self, f: &[f64]) -> Option<(f64, Vec<bool>)> {
        let d = self.domain;
        let units = d.unit_count();
        let value: Vec<f64> = (0..units)
            .map(|u| {
                let vs = d.unit_vertices(u);
                vs.iter().map(|&v| f[v]).sum::<f64>() / vs.len() as f64
            })
            .collect();
        let mut order: Vec<usize> = (0..units).collect();
        order.sort_by(|&a, &b| value[a].total_cmp(&value[b]).then(a.cmp(&b)));
        let mut in_a = vec![false; units];
        let mut cut = 0.0;
        let mut vol_a = 0.0;
        let mut best: Option<(f64, usize)> = None;
        for (k, &u) in order.iter().enumerate().take(units.saturating_sub(1)) {
            let at_threshold = value[order[k + 1]] > value[u];
            in_a[u] = true;
            vol_a += self.volumes[u];
            for &e in &self.unit_edges[u] {
                let [x, y] = d.edge_units(e).expect("listed edges separate two units");
                let other = if x == u { y } else { x };
                let w = d.edge_interface_measure(e);
                if in_a[other] {
                    cut -= w;
                } else {
                    cut += w;
                }
            }
            let vol_b = self.total - vol_a;
            if !at_threshold || vol_a <= 0.0 || vol_b <= 0.0 {
                continue;
            }
            let ratio = cut.max(0.0) / vol_a.min(vol_b);
            if best.is_none_or(|(b, _)| ratio < b) {
                best = Some((ratio, k));
            }
        }
        let (ratio, k) = best?;
        let mut labels = vec![false; units];
        for &u in &order[..=k] {
            labels[u] = true;
        }
        Some((ratio, labels))
    }

    pub fn sweep(&self, f: &[f64]) -> Result<CheegerResult> {
        let d = self.domain;
        if f.len() != d.vertex_count() {
            return Err(Error::InvalidParams(format!(
                "function has {} values for {} vertices",
                f.len(),
                d.vertex_count()
            )));
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("function has non-finite values".into()));
        }
        let (_, labels) = self.best_prefix(f).ok_or(Error::ConstantFunction)?;
        let partition = Partition::new(
            d.unit_kind(),
            labels.iter().map(|&a| if a { Side::A } else { Side::B }).collect(),
        )?;
        let measures = d.partition_measures(&partition)?;
        Ok(CheegerResult {
            h: measures.ratio(),
            partition,
            measures,
            method: CheegerMethod::Sweep,
        })
    }
}

/// Best threshold cut of `f`. Graph vertices are swept directly; mesh faces
/// are swept by the mean of their vertex values.
pub fn cheeger_sweep<D: Domain + ?Sized>(domain: &D, f: &[f64]) -> Result<CheegerResult> {
    Sweeper::new(domain).sweep(f)
}

/// Search over combinations of an eigenvalue cluster's basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSweepOptions {
    /// Random unit combinations swept after the basis vectors.
    pub samples: usize,
    /// Best candidates refined by a local search on their coefficients.
    pub refine_starts: usize,
    /// Sweeps spent per refined candidate.
    pub refine_budget: usize,
    pub seed: u64,
}

impl Default for ClusterSweepOptions {
    fn default() -> Self {
        Self {
            samples: 256,
            refine_starts: 4,
            refine_budget: 200,
            seed: 0,
        }
    }
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>();
        if norm > 1e-6 && norm <= 1.0 {
            let s = norm.sqrt();
            return c.into_iter().map(|x| x / s).collect();
        }
    }
}

/// Sweeps the basis vectors of an eigenvalue cluster and seeded random unit
/// combinations of them, then refines the best few combinations by a
/// shrinking random search. Every candidate is a threshold cut of a vector
/// in the eigenspace. Ties go to the earliest candidate.
pub fn cluster_sweep<D: Domain + ?Sized>(
    domain: &D,
    cluster: &EigenCluster,
    options: &ClusterSweepOptions,
) -> Result<CheegerResult> {
    let dim = cluster.vectors.len();
    if dim == 0 {
        return Err(Error::InvalidParams("empty eigenvector cluster".into()));
    }
    let n = domain.vertex_count();
    let mut coefficients: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    if dim > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        for _ in 0..options.samples {
            coefficients.push(random_direction(&mut rng, dim));
        }
    }
    let sweeper = Sweeper::new(domain);
    let evaluate = |c: &[f64]| {
        let mut f = vec![0.0; n];
        for (w, v) in c.iter().zip(&cluster.vectors) {
            f.iter_mut().zip(v).for_each(|(a, b)| *a += w * b);
        }
        sweeper.best_prefix(&f)
    };
    let scored: Vec<Option<(f64, Vec<bool>)>> = coefficients.par_iter().map(|c| evaluate(c)).collect();
    let mut ranked: Vec<usize> = (0..scored.len()).filter(|&i| scored[i].is_some()).collect();
    ranked.sort_by(|&a, &b| {
        let (ha, hb) = (scored[a].as_ref().unwrap().0, scored[b].as_ref().unwrap().0);
        ha.total_cmp(&hb).then(a.cmp(&b))
    });
    let &first = ranked.first().ok_or(Error::ConstantFunction)?;
    let mut best = scored[first].clone().expect("ranked candidates are scored");
    if dim > 1 {
        let refined: Vec<Option<(f64, Vec<bool>)>> = ranked
            .iter()
            .take(options.refine_starts)
            .enumerate()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(k, &i)| {
                let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
                rng.set_stream(1 + k as u64);
                let mut c = coefficients[i].clone();
                let mut cur = scored[i].clone()?;
                let mut step = 0.3;
                let mut misses = 0;
                for _ in 0..options.refine_budget {
                    if step < 1e-4 {
                        break;
                    }
                    let d = random_direction(&mut rng, dim);
                    let mut trial: Vec<f64> = c.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                    let norm = trial.iter().map(|x| x * x).sum::<f64>().sqrt();
                    trial.iter_mut().for_each(|x| *x /= norm);
                    match evaluate(&trial) {
                        Some(cand) if cand.0 < cur.0 => {
                            c = trial;
                            cur = cand;
                            misses = 0;
                        }
                        _ => {
                            misses += 1;
                            if misses >= 8 {
                                step *= 0.5;
                                misses = 0;
                            }
                        }
                    }
                }
                Some(cur)
            })
            .collect();
        for cand in refined.into_iter().flatten() {
            if cand.0 < best.0 {
                best = cand;
            }
        }
    }
    let partition = Partition::new(
        domain.unit_kind(),
        best.1.iter().map(|&a| if a { Side::A } else { Side::B }).collect(),
    )?;
    let measures = domain.partition_measures(&partition)?;
    Ok(CheegerResult {
        h: measures.ratio(),
        partition,
        measures,
        method: CheegerMethod::Sweep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::GraphEdge;
    use crate::spectral::{lambda1, SolverConfig};
    use proptest::prelude::*;

    #[test]
    fn lexicographic_order() {
        // {0,2} < {0,3} < {1}; {0} < {0,1} (prefix first).
        assert!(lex_less(0b0101, 0b1001));
        assert!(lex_less(0b1001, 0b0010));
        assert!(lex_less(0b0001, 0b0011));
        assert!(!lex_less(0b0011, 0b0001));
        assert!(!lex_less(0b0110, 0b0110));
    }

    #[test]
    fn exact_small_graphs() {
        let two = cheeger_exact(&WeightedGraph::path(2).unwrap()).unwrap();
        assert_eq!(two.h, 1.0);
        let c4 = cheeger_exact(&WeightedGraph::cycle(4).unwrap()).unwrap();
        assert_eq!(c4.h, 1.0);
        assert_eq!(c4.partition.side_a(), vec![0, 1]);
        let k3 = cheeger_exact(&WeightedGraph::complete(3).unwrap()).unwrap();
        assert_eq!(k3.h, 2.0);
        assert_eq!(k3.partition.side_a(), vec![0]);
    }

    #[test]
    fn exact_rejects_large_graphs() {
        assert!(matches!(
            cheeger_exact(&WeightedGraph::path(23).unwrap()),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn sweep_on_four_cycle_attains_h() {
        let g = WeightedGraph::cycle(4).unwrap();
        let r = cheeger_sweep(&g, &[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert_eq!(r.h, 1.0);
        let ev = lambda1(&g.laplacian(), &SolverConfig::default()).unwrap();
        assert!(cheeger_sweep(&g, &ev.eigenvector).unwrap().h >= 1.0);
    }

    #[test]
    fn sweep_rejects_constant() {
        let g = WeightedGraph::cycle(4).unwrap();
        assert!(matches!(cheeger_sweep(&g, &[2.0; 4]), Err(Error::ConstantFunction)));
    }

    fn graph_strategy() -> impl Strategy<Value = WeightedGraph> {
        (4usize..=12).prop_flat_map(|n| {
            let tree = proptest::collection::vec((0.0f64..1.0, 0.05f64..1.0), n - 1);
            let extra = proptest::collection::vec((0..n, 0..n, 0.05f64..1.0), 0..n);
            let w = proptest::collection::vec(0.2f64..3.0, n);
            (tree, extra, w).prop_map(|(tree, extra, w)| {
                let mut edges: Vec<GraphEdge> = tree
                    .iter()
                    .enumerate()
                    .map(|(i, &(p, c))| GraphEdge {
                        a: ((p * (i + 1) as f64) as usize).min(i),
                        b: i + 1,
                        conductance: c,
                        length: 1.0,
                    })
                    .collect();
                for (a, b, c) in extra {
                    if a != b
                        && !edges
                            .iter()
                            .any(|e| (e.a, e.b) == (a.min(b), a.max(b)) || (e.a, e.b) == (a.max(b), a.min(b)))
                    {
                        edges.push(GraphEdge {
                            a,
                            b,
                            conductance: c,
                            length: 1.0,
                        });
                    }
                }
                WeightedGraph::new(w, &edges).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sweep_never_beats_exact(g in graph_strategy()) {
            let exact = cheeger_exact(&g).unwrap();
            let ev = lambda1(&g.laplacian(), &SolverConfig::default()).unwrap();
            let sweep = cheeger_sweep(&g, &ev.eigenvector).unwrap();
            prop_assert!(sweep.h >= exact.h * (1.0 - 1e-12));
            let rebuilt = g.partition_measures(&exact.partition).unwrap().ratio();
            prop_assert!((rebuilt - exact.h).abs() <= 1e-12 * exact.h);
            let swapped = g.partition_measures(&exact.partition.swapped()).unwrap().ratio();
            prop_assert!((swapped - exact.h).abs() <= 1e-12 * exact.h);
        }
    }
}
