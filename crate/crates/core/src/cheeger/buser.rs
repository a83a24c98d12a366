use serde::{Deserialize, Serialize};

use super::local::{classify_tilde_sets, gromov_cover, TildeClass, TildeDecomposition};
use crate::error::{Error, Result};
use crate::manifold::{geodesic_distance, Domain, Partition};
use crate::spectral::{lambda1, rayleigh_quotient, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct BuserFunction {
    pub values: Vec<f64>,
    /// Distance to Σ̃.
    pub rho: Vec<f64>,
    pub vol_a_tilde: f64,
    pub vol_b_tilde: f64,
    /// Mass of `{ρ ≤ r}`.
    pub tube_volume: f64,
}

/// Piecewise test function: `Vol(B̃)` on Ã beyond distance `r` from Σ̃,
/// `−Vol(Ã)` on B̃ beyond `r`, linear in `ρ/r` in between and `0` on Σ̃.
pub fn buser_test_function<D: Domain + ?Sized>(
    domain: &D,
    decomposition: &TildeDecomposition,
    r: f64,
) -> Result<BuserFunction> {
    let n = domain.vertex_count();
    if decomposition.classes.len() != n {
        return Err(Error::InvalidParams("decomposition does not match the domain".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParams(format!("radius {r} must be positive")));
    }
    let sigma = decomposition.members(TildeClass::Sigma);
    if sigma.is_empty() {
        return Err(Error::Data("tilde set Σ̃ is empty although both Ã and B̃ are not".into()));
    }
    let mass = domain.vertex_masses();
    let mut vol_a = 0.0;
    let mut vol_b = 0.0;
    for (class, &m) in decomposition.classes.iter().zip(mass) {
        match class {
            TildeClass::A => vol_a += m,
            TildeClass::B => vol_b += m,
            TildeClass::Sigma => {}
        }
    }
    if vol_a == 0.0 || vol_b == 0.0 {
        return Err(Error::Data("tilde sets Ã and B̃ must both be nonempty".into()));
    }
    let rho = geodesic_distance(domain, &sigma)?.values;
    let values: Vec<f64> = (0..n)
        .map(|v| {
            let t = (rho[v] / r).min(1.0);
            match decomposition.classes[v] {
                TildeClass::Sigma => 0.0,
                TildeClass::A => t * vol_b,
                TildeClass::B => -t * vol_a,
            }
        })
        .collect();
    let tube_volume = (0..n).filter(|&v| rho[v] <= r).map(|v| mass[v]).sum();
    Ok(BuserFunction {
        values,
        rho,
        vol_a_tilde: vol_a,
        vol_b_tilde: vol_b,
        tube_volume,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuserReport {
    /// Isoperimetric ratio of the supplied partition.
    pub h_frak: f64,
    pub epsilon: f64,
    pub k: f64,
    pub r: f64,
    pub lambda1: f64,
    pub rayleigh: f64,
    /// `rayleigh · r / h_frak`.
    pub c_emp: f64,
    pub sigma_count: usize,
    pub a_count: usize,
    pub b_count: usize,
    pub cover_centers: usize,
    pub cover_s: usize,
    pub cover_m: usize,
    pub cover_multiplicity: usize,
    /// `|∫f|` and the bound `Vol(Σ̃^r) · Vol(M)`.
    pub mean_integral: f64,
    pub mean_bound: f64,
    /// `λ₁ ≤ rayleigh` within `1e-9` relative.
    pub variational_ok: bool,
}

/// Builds the test function for `partition` at `r = ε · min(K^{−1/2}, 1/𝔥)`
/// and compares its Rayleigh quotient with `λ₁`.
pub fn verify_buser<D: Domain + ?Sized>(
    domain: &D,
    partition: &Partition,
    k: f64,
    epsilon: f64,
    solver: &SolverConfig,
) -> Result<BuserReport> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidParams(format!("curvature bound {k} must be >= 0")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParams(format!("epsilon {epsilon} must be positive")));
    }
    let h_frak = domain.partition_measures(partition)?.ratio();
    if !(h_frak > 0.0) {
        return Err(Error::EmptyInterface);
    }
    let scale = if k > 0.0 {
        (1.0 / k.sqrt()).min(1.0 / h_frak)
    } else {
        1.0 / h_frak
    };
    let r = epsilon * scale;
    let lap = domain.laplacian();
    let l1 = lambda1(&lap, solver)?.lambda1;
    let dec = classify_tilde_sets(domain, partition, r)?;
    let cover = gromov_cover(domain, r, &dec)?;
    let f = buser_test_function(domain, &dec, r)?;
    let rq = rayleigh_quotient(&lap, &f.values)?;
    let integral: f64 = f.values.iter().zip(&lap.mass).map(|(a, m)| a * m).sum();
    let total: f64 = lap.mass.iter().sum();
    Ok(BuserReport {
        h_frak,
        epsilon,
        k,
        r,
        lambda1: l1,
        rayleigh: rq,
        c_emp: rq * r / h_frak,
        sigma_count: dec.count(TildeClass::Sigma),
        a_count: dec.count(TildeClass::A),
        b_count: dec.count(TildeClass::B),
        cover_centers: cover.k,
        cover_s: cover.s,
        cover_m: cover.m,
        cover_multiplicity: cover.multiplicity,
        mean_integral: integral.abs(),
        mean_bound: f.tube_volume * total,
        variational_ok: l1 <= rq * (1.0 + 1e-9),
    })
}

/// `(C_n / D) · e^{−3(n−1)√K·D}`; with `include_sqrt_k = false` the exponent
/// is `−3(n−1)D`.
pub fn diameter_lower_bound(n: usize, k: f64, d: f64, c_n: f64, include_sqrt_k: bool) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("dimension {n} must be >= 2")));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParams(format!("diameter {d} must be positive")));
    }
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidParams(format!("curvature bound {k} must be >= 0")));
    }
    let rate = if include_sqrt_k { k.sqrt() } else { 1.0 };
    Ok(c_n / d * (-3.0 * (n as f64 - 1.0) * rate * d).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheeger::local::TildeClass;
    use crate::manifold::generators;

    #[test]
    fn diameter_bound_values() {
        assert_eq!(diameter_lower_bound(3, 0.0, 2.0, 1.5, true).unwrap(), 0.75);
        let v = diameter_lower_bound(2, 1.0, 1.0, 1.0, true).unwrap();
        assert!((v - 0.049787068367863944).abs() < 1e-15);
        // Printed form keeps the exponent at K = 0.
        let p = diameter_lower_bound(2, 0.0, 1.0, 1.0, false).unwrap();
        assert!((p - 0.049787068367863944).abs() < 1e-15);
        assert!(diameter_lower_bound(2, 0.0, 0.0, 1.0, true).is_err());
    }

    #[test]
    fn test_function_branches() {
        let t = generators::flat_torus(24, 24, 1.0, 1.0).unwrap();
        let p = t.straight_cut().unwrap();
        let r = 0.1;
        let d = classify_tilde_sets(&t.mesh, &p, r).unwrap();
        let f = buser_test_function(&t.mesh, &d, r).unwrap();
        let bound = f.vol_a_tilde.max(f.vol_b_tilde);
        for v in 0..f.values.len() {
            assert!(f.values[v].abs() <= bound);
            match d.classes[v] {
                TildeClass::Sigma => assert_eq!(f.values[v], 0.0),
                TildeClass::A if f.rho[v] >= r => assert_eq!(f.values[v], f.vol_b_tilde),
                TildeClass::B if f.rho[v] >= r => assert_eq!(f.values[v], -f.vol_a_tilde),
                _ => {}
            }
        }
        let swapped = classify_tilde_sets(&t.mesh, &p.swapped(), r).unwrap();
        let g = buser_test_function(&t.mesh, &swapped, r).unwrap();
        for (a, b) in f.values.iter().zip(&g.values) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn sphere_equator_verification() {
        let m = generators::icosphere(3).unwrap();
        let p = generators::equator_cut(&m).unwrap();
        let rep = verify_buser(&m, &p, 0.0, 0.5, &SolverConfig::default()).unwrap();
        assert!(rep.variational_ok);
        assert!((rep.h_frak - 1.0).abs() < 0.02, "{}", rep.h_frak);
        assert!(rep.mean_integral <= rep.mean_bound);
        let sw = verify_buser(&m, &p.swapped(), 0.0, 0.5, &SolverConfig::default()).unwrap();
        assert!((sw.c_emp - rep.c_emp).abs() <= 1e-9 * rep.c_emp);
    }
}
