//! First nonzero eigenvalue of the generalised problem `L v = λ M v`.
//!
//! Small problems go through a dense symmetric eigensolver; larger ones use
//! shift-invert Lanczos with the constant mode deflated exactly.

mod lanczos;
pub mod skyline;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::Laplacian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Problems with fewer vertices than this use the dense path.
    pub dense_threshold: usize,
    pub seed: u64,
    /// Required `‖Lv − λMv‖ / ‖Mv‖`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relative gap under which eigenvalues count as one cluster.
    pub cluster_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dense_threshold: 500,
            seed: 0,
            tolerance: 1e-8,
            max_iterations: 400,
            cluster_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda1: f64,
    /// Mass-normalised (`vᵀMv = 1`) and mass-orthogonal to constants.
    pub eigenvector: Vec<f64>,
    /// `‖Lv − λMv‖ / ‖Mv‖`.
    pub residual: f64,
    pub method: SolverMethod,
    pub iterations: usize,
}

/// Orthonormal (in the mass inner product) basis of the eigenspace of `λ₁`,
/// up to `cluster_tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub lambda1: f64,
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub method: SolverMethod,
}

pub fn lambda1(lap: &Laplacian, config: &SolverConfig) -> Result<SpectralResult> {
    check_input(lap)?;
    if lap.dim() < config.dense_threshold {
        dense_solve(lap, config, 1).map(|mut c| {
            let v = c.vectors.swap_remove(0);
            let residual = relative_residual(lap, c.lambda1, &v);
            SpectralResult {
                lambda1: c.lambda1,
                eigenvector: v,
                residual,
                method: SolverMethod::Dense,
                iterations: 1,
            }
        })
    } else {
        lanczos::solve(lap, config, &[])
    }
}

/// Eigenvector basis of the `λ₁` cluster, at most `max_vectors` long.
pub fn lambda1_cluster(lap: &Laplacian, config: &SolverConfig, max_vectors: usize) -> Result<EigenCluster> {
    check_input(lap)?;
    let max_vectors = max_vectors.max(1);
    if lap.dim() < config.dense_threshold {
        return dense_solve(lap, config, max_vectors);
    }
    let first = lanczos::solve(lap, config, &[])?;
    let lambda1 = first.lambda1;
    let mut eigenvalues = vec![lambda1];
    let mut vectors = vec![first.eigenvector];
    while vectors.len() < max_vectors && vectors.len() + 1 < lap.dim() {
        let next = lanczos::solve(lap, config, &vectors)?;
        if next.lambda1 > lambda1 * (1.0 + config.cluster_tolerance) {
            break;
        }
        eigenvalues.push(next.lambda1);
        vectors.push(next.eigenvector);
    }
    Ok(EigenCluster {
        lambda1,
        eigenvalues,
        vectors,
        method: SolverMethod::Lanczos,
    })
}

/// `∫|∇f|² / ∫(f − f̄)²` in the discrete inner products.
pub fn rayleigh_quotient(lap: &Laplacian, f: &[f64]) -> Result<f64> {
    if f.len() != lap.dim() {
        return Err(Error::InvalidParams(format!(
            "function has {} values for {} vertices",
            f.len(),
            lap.dim()
        )));
    }
    if f.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams("function has non-finite values".into()));
    }
    let mean = lap.mean(f);
    let centred: Vec<f64> = f.iter().map(|x| x - mean).collect();
    let var = lap.mass_inner(&centred, &centred);
    let norm = lap.mass_inner(f, f);
    if !(var > 1e-14 * norm) || var == 0.0 {
        return Err(Error::ConstantFunction);
    }
    Ok(lap.stiffness.energy(f) / var)
}

pub fn relative_residual(lap: &Laplacian, lambda: f64, v: &[f64]) -> f64 {
    let lv = lap.stiffness.apply(v);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..v.len() {
        let mv = lap.mass[i] * v[i];
        num += (lv[i] - lambda * mv).powi(2);
        den += mv * mv;
    }
    (num / den).sqrt()
}

fn check_input(lap: &Laplacian) -> Result<()> {
    let n = lap.dim();
    if n < 2 {
        return Err(Error::InvalidParams("need at least two vertices".into()));
    }
    if lap.stiffness.dim() != n {
        return Err(Error::InvalidParams("stiffness and mass sizes differ".into()));
    }
    if lap.mass.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
        return Err(Error::InvalidParams("mass entries must be positive".into()));
    }
    Ok(())
}

/// Largest diagonal ratio `L_ii / M_ii`, an upper bound on the spectrum up
/// to a factor 2.
pub(crate) fn spectral_scale(lap: &Laplacian) -> f64 {
    lap.stiffness
        .diagonal()
        .iter()
        .zip(&lap.mass)
        .map(|(d, m)| d / m)
        .fold(0.0, f64::max)
}

/// Mass-orthogonalises `v` against constants and `basis`, then normalises.
pub(crate) fn mass_orthonormalise(lap: &Laplacian, v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        let mean = lap.mean(v);
        v.iter_mut().for_each(|x| *x -= mean);
        for b in basis {
            let c = lap.mass_inner(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let norm = lap.mass_inner(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn dense_solve(lap: &Laplacian, config: &SolverConfig, max_vectors: usize) -> Result<EigenCluster> {
    let n = lap.dim();
    let sqrt_m: Vec<f64> = lap.mass.iter().map(|m| m.sqrt()).collect();
    let k = lap.stiffness.to_dense();
    let s = DMatrix::from_fn(n, n, |i, j| k[(i, j)] / (sqrt_m[i] * sqrt_m[j]));
    let eig = SymmetricEigen::new(s);
    let e0_norm = sqrt_m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let overlap = |c: usize| -> f64 {
        eig.eigenvectors
            .column(c)
            .iter()
            .zip(&sqrt_m)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .abs()
            / e0_norm
    };
    let kernel = (0..n)
        .max_by(|&a, &b| overlap(a).total_cmp(&overlap(b)))
        .expect("n >= 2");
    let mut rest: Vec<usize> = (0..n).filter(|&c| c != kernel).collect();
    rest.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let lambda1 = eig.eigenvalues[rest[0]];
    let scale = spectral_scale(lap);
    if !(lambda1 > 1e-12 * scale) {
        return Err(Error::Disconnected);
    }
    let mut eigenvalues = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for &c in rest.iter().take(max_vectors) {
        let lam = eig.eigenvalues[c];
        if lam > lambda1 * (1.0 + config.cluster_tolerance) {
            break;
        }
        let mut v: Vec<f64> = eig
            .eigenvectors
            .column(c)
            .iter()
            .zip(&sqrt_m)
            .map(|(y, s)| y / s)
            .collect();
        if mass_orthonormalise(lap, &mut v, &vectors) == 0.0 {
            continue;
        }
        canonical_sign(&mut v);
        eigenvalues.push(lam);
        vectors.push(v);
    }
    Ok(EigenCluster {
        lambda1,
        eigenvalues,
        vectors,
        method: SolverMethod::Dense,
    })
}

/// Fixes the sign so that the entry of largest magnitude is positive.
pub(crate) fn canonical_sign(v: &mut [f64]) {
    let idx = (0..v.len())
        .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
        .unwrap_or(0);
    if v.get(idx).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{generators, Domain, GraphEdge, WeightedGraph};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph {
        let mut edges: Vec<GraphEdge> = (1..n)
            .map(|v| GraphEdge {
                a: rng.gen_range(0..v),
                b: v,
                conductance: rng.gen_range(0.1..1.0),
                length: 1.0,
            })
            .collect();
        for _ in 0..n {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b && !edges.iter().any(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a)) {
                edges.push(GraphEdge {
                    a,
                    b,
                    conductance: rng.gen_range(0.1..1.0),
                    length: 1.0,
                });
            }
        }
        let weights = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        WeightedGraph::new(weights, &edges).unwrap()
    }

    #[test]
    fn two_vertex_graph() {
        let g = WeightedGraph::path(2).unwrap();
        let r = lambda1(&g.laplacian(), &SolverConfig::default()).unwrap();
        assert!((r.lambda1 - 2.0).abs() < 1e-12);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn four_cycle() {
        let g = WeightedGraph::cycle(4).unwrap();
        let lap = g.laplacian();
        let r = lambda1(&lap, &SolverConfig::default()).unwrap();
        assert!((r.lambda1 - 2.0).abs() < 1e-12);
        let split = [1.0, 1.0, -1.0, -1.0];
        assert!((rayleigh_quotient(&lap, &split).unwrap() - 2.0).abs() < 1e-12);
        let c = lambda1_cluster(&lap, &SolverConfig::default(), 4).unwrap();
        assert_eq!(c.vectors.len(), 2);
    }

    #[test]
    fn constant_function_rejected() {
        let g = WeightedGraph::cycle(5).unwrap();
        assert!(matches!(
            rayleigh_quotient(&g.laplacian(), &[3.0; 5]),
            Err(Error::ConstantFunction)
        ));
    }

    #[test]
    fn rayleigh_quotient_bounds_lambda1_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(3..40);
            let g = random_graph(&mut rng, n);
            let lap = g.laplacian();
            let l1 = lambda1(&lap, &SolverConfig::default()).unwrap().lambda1;
            assert!(l1 > 0.0);
            for _ in 0..5 {
                let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                assert!(rayleigh_quotient(&lap, &f).unwrap() >= l1 * (1.0 - 1e-10));
            }
        }
    }

    #[test]
    fn scale_invariance() {
        let g = WeightedGraph::cycle(7).unwrap();
        let lap = g.laplacian();
        let f: Vec<f64> = (0..7).map(|i| (i as f64).sin()).collect();
        let g2: Vec<f64> = f.iter().map(|x| -3.5 * x + 11.0).collect();
        let a = rayleigh_quotient(&lap, &f).unwrap();
        let b = rayleigh_quotient(&lap, &g2).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn dense_and_lanczos_agree() {
        let m = generators::icosphere(3).unwrap(); // 642 vertices
        let lap = m.laplacian();
        let dense = SolverConfig {
            dense_threshold: usize::MAX,
            ..SolverConfig::default()
        };
        let iter = SolverConfig {
            dense_threshold: 0,
            ..SolverConfig::default()
        };
        let a = lambda1(&lap, &dense).unwrap();
        let b = lambda1(&lap, &iter).unwrap();
        assert_eq!(b.method, SolverMethod::Lanczos);
        assert!(
            (a.lambda1 - b.lambda1).abs() < 1e-7 * a.lambda1,
            "{} {}",
            a.lambda1,
            b.lambda1
        );
        assert!(b.residual <= 1e-8);
        let ca = lambda1_cluster(&lap, &dense, 8).unwrap();
        let cb = lambda1_cluster(&lap, &iter, 8).unwrap();
        assert_eq!(ca.vectors.len(), 3);
        assert_eq!(cb.vectors.len(), 3);
    }

    #[test]
    fn torus_lambda1_is_fourfold() {
        let t = generators::flat_torus(24, 24, 1.0, 1.0).unwrap();
        let lap = t.mesh.laplacian();
        let c = lambda1_cluster(&lap, &SolverConfig::default(), 8).unwrap();
        assert_eq!(c.vectors.len(), 4);
        let exact = 4.0 * std::f64::consts::PI.powi(2);
        assert!((c.lambda1 - exact).abs() < 0.02 * exact, "{}", c.lambda1);
        for (i, u) in c.vectors.iter().enumerate() {
            for (j, v) in c.vectors.iter().enumerate() {
                let ip = lap.mass_inner(u, v);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sphere_lambda1_near_two() {
        let m = generators::icosphere(4).unwrap();
        let r = lambda1(&m.laplacian(), &SolverConfig::default()).unwrap();
        assert!((r.lambda1 - 2.0).abs() < 0.02 * 2.0, "{}", r.lambda1);
        assert!(r.residual <= 1e-8);
        let norm = m.laplacian().mass_inner(&r.eigenvector, &r.eigenvector);
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let m = generators::icosphere(3).unwrap();
        let cfg = SolverConfig::default();
        let a = lambda1(&m.laplacian(), &cfg).unwrap();
        let b = lambda1(&m.laplacian(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn laplacian_is_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = generators::dumbbell(0.3, 0).unwrap();
        let lap = m.mesh.laplacian();
        for _ in 0..20 {
            let f: Vec<f64> = (0..lap.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(lap.stiffness.energy(&f) >= 0.0);
        }
    }
}
