use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::skyline::SkylineCholesky;
use super::{
    canonical_sign, mass_orthonormalise, relative_residual, spectral_scale, SolverConfig, SolverMethod, SpectralResult,
};
use crate::error::{Error, Result};
use crate::manifold::Laplacian;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(a, b)| *a += alpha * b);
}

fn project_out(y: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in basis {
            let c = dot(y, u);
            axpy(y, -c, u);
        }
    }
}

/// Smallest eigenpair above zero, excluding constants and the mass-orthonormal
/// vectors in `deflate`.
///
/// Works in `y = M^{1/2} v`, where `M^{1/2}(L + σM)^{-1}M^{1/2}` has
/// eigenvalues `1/(λ + σ)`; the wanted pair is its largest.
pub(super) fn solve(lap: &Laplacian, config: &SolverConfig, deflate: &[Vec<f64>]) -> Result<SpectralResult> {
    let n = lap.dim();
    let sqrt_m: Vec<f64> = lap.mass.iter().map(|m| m.sqrt()).collect();
    let diag = lap.stiffness.diagonal();
    let mean_ratio = diag.iter().zip(&lap.mass).map(|(d, m)| d / m).sum::<f64>() / n as f64;
    let sigma = 1e-6 * mean_ratio;
    let chol = SkylineCholesky::factor_shifted(&lap.stiffness, &lap.mass, sigma)?;

    let mut locked: Vec<Vec<f64>> = Vec::with_capacity(deflate.len() + 1);
    let norm0 = sqrt_m.iter().map(|x| x * x).sum::<f64>().sqrt();
    locked.push(sqrt_m.iter().map(|x| x / norm0).collect());
    for b in deflate {
        let mut y: Vec<f64> = b.iter().zip(&sqrt_m).map(|(v, s)| v * s).collect();
        project_out(&mut y, &locked);
        let nrm = dot(&y, &y).sqrt();
        if nrm > 1e-12 {
            y.iter_mut().for_each(|x| *x /= nrm);
            locked.push(y);
        }
    }
    let available = n.saturating_sub(locked.len());
    if available == 0 {
        return Err(Error::InvalidParams("no eigenvectors left after deflation".into()));
    }

    let apply = |y: &[f64]| -> Vec<f64> {
        let b: Vec<f64> = y.iter().zip(&sqrt_m).map(|(a, s)| a * s).collect();
        let mut z = chol.solve(&b);
        z.iter_mut().zip(&sqrt_m).for_each(|(a, s)| *a *= s);
        project_out(&mut z, &locked);
        z
    };

    // Each deflation depth needs a fresh start vector: with an exactly
    // degenerate eigenspace, a reused one has no component left in it.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(deflate.len() as u64);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project_out(&mut q, &locked);
    let nq = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= nq);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let scale = spectral_scale(lap);
    let mut last_residual = f64::INFINITY;

    for j in 0..config.max_iterations.max(1) {
        let mut w = apply(&basis[j]);
        let a = dot(&w, &basis[j]);
        axpy(&mut w, -a, &basis[j]);
        if j > 0 {
            axpy(&mut w, -beta[j - 1], &basis[j - 1]);
        }
        for _ in 0..2 {
            for u in &basis {
                let c = dot(&w, u);
                axpy(&mut w, -c, u);
            }
        }
        project_out(&mut w, &locked);
        alpha.push(a);
        let b = dot(&w, &w).sqrt();
        beta.push(b);

        let m = j + 1;
        let exhausted = m >= available || b <= 1e-14 * alpha.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        let check = m <= 40 || m % 5 == 0 || exhausted || m == config.max_iterations;
        if check {
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let top = (0..m)
                .max_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]))
                .expect("m >= 1");
            let s = eig.eigenvectors.column(top);
            let mut y = vec![0.0; n];
            for (k, u) in basis.iter().enumerate() {
                axpy(&mut y, s[k], u);
            }
            let mut v: Vec<f64> = y.iter().zip(&sqrt_m).map(|(a, s)| a / s).collect();
            mass_orthonormalise(lap, &mut v, deflate);
            let lambda = lap.stiffness.energy(&v);
            let residual = relative_residual(lap, lambda, &v);
            if !(lambda > 1e-12 * scale) {
                return Err(Error::Disconnected);
            }
            if residual <= config.tolerance || exhausted {
                if residual > config.tolerance {
                    return Err(Error::NoConvergence {
                        iterations: m,
                        residual,
                    });
                }
                canonical_sign(&mut v);
                return Ok(SpectralResult {
                    lambda1: lambda,
                    eigenvector: v,
                    residual,
                    method: SolverMethod::Lanczos,
                    iterations: m,
                });
            }
            last_residual = residual;
        }
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    Err(Error::NoConvergence {
        iterations: config.max_iterations,
        residual: last_residual,
    })
}
