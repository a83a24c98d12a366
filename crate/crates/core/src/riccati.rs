//! Riccati comparison function `ψ_{K,H}`.
//!
//! `ψ` solves `ψ' + ψ²/(n−1) − (n−1)K = 0` with `ψ(0) = H`. It bounds the
//! Laplacian of the signed distance to a hypersurface with mean curvature `H`
//! in a manifold with `Ric ≥ −(n−1)K`, so its envelopes control how fast the
//! volume of a tube around the hypersurface can grow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this curvature bound the `K = 0` closed form is used.
pub const FLAT_K_THRESHOLD: f64 = 1e-14;

/// Magnitude at which the RK4 integrator declares a blow-up.
pub const DEFAULT_BLOW_UP_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonParams {
    /// Manifold dimension, at least 2.
    pub n: usize,
    /// Curvature bound: `Ric ≥ −(n−1)K`.
    pub k: f64,
    /// Initial mean curvature of the hypersurface.
    pub h: f64,
}

/// Which side of the hypersurface the envelope is taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoSide {
    /// `ρ ≥ 0`: bound on `Δρ`.
    NonnegativeRho,
    /// `ρ ≤ 0`: bound on `−Δρ`.
    NonpositiveRho,
}

impl ComparisonParams {
    pub fn new(n: usize, k: f64, h: f64) -> Result<Self> {
        let p = Self { n, k, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("dimension n = {} < 2", self.n)));
        }
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(Error::InvalidParams(format!(
                "curvature bound K = {} must be finite and >= 0",
                self.k
            )));
        }
        if !self.h.is_finite() {
            return Err(Error::InvalidParams(format!(
                "mean curvature H = {} is not finite",
                self.h
            )));
        }
        Ok(())
    }

    fn n1(&self) -> f64 {
        (self.n - 1) as f64
    }

    fn is_flat(&self) -> bool {
        self.k < FLAT_K_THRESHOLD
    }

    /// `(n−1)√K`, the stationary value of the equation.
    pub fn equilibrium(&self) -> f64 {
        self.n1() * self.k.sqrt()
    }

    /// Right-hand side `ψ' = −ψ²/(n−1) + (n−1)K`.
    pub fn rhs(&self, psi: f64) -> f64 {
        -psi * psi / self.n1() + self.n1() * self.k
    }
}

/// Maximal time of existence `T` of `ψ_{K,H}`; `+∞` when no blow-up occurs.
pub fn max_existence_time(params: &ComparisonParams) -> Result<f64> {
    params.validate()?;
    if params.h >= 0.0 {
        return Ok(f64::INFINITY);
    }
    let n1 = params.n1();
    if params.is_flat() {
        return Ok(n1 / -params.h);
    }
    let ratio = params.equilibrium() / -params.h;
    if ratio >= 1.0 {
        // The denominator (n−1)√K cosh + H sinh never vanishes.
        return Ok(f64::INFINITY);
    }
    Ok(ratio.atanh() / params.k.sqrt())
}

/// Closed-form `ψ_{K,H}(t)` on `0 ≤ t < T`.
pub fn psi_closed_form(params: &ComparisonParams, t: f64) -> Result<f64> {
    let t_max = max_existence_time(params)?;
    if !(t >= 0.0) || t >= t_max {
        return Err(Error::OutsideExistence { t, t_max });
    }
    if t == 0.0 {
        return Ok(params.h);
    }
    let n1 = params.n1();
    let h = params.h;
    if params.is_flat() {
        let den = n1 + t * h;
        if den <= 0.0 {
            return Err(Error::OutsideExistence { t, t_max });
        }
        return Ok(n1 * h / den);
    }
    let c = params.equilibrium();
    if h == c {
        return Ok(h);
    }
    // Numerator and denominator divided by cosh(√K t) so large t cannot overflow.
    let th = (params.k.sqrt() * t).tanh();
    let den = c + h * th;
    if den <= 0.0 {
        return Err(Error::OutsideExistence { t, t_max });
    }
    Ok(c * (c * th + h) / den)
}

/// Constant bound on `Δρ` (or `−Δρ`) over the whole existence interval.
pub fn psi_upper_bound(params: &ComparisonParams, side: RhoSide) -> Result<f64> {
    params.validate()?;
    let c = params.equilibrium();
    Ok(match side {
        RhoSide::NonnegativeRho if params.h <= 0.0 => c,
        RhoSide::NonnegativeRho => params.h.max(c),
        RhoSide::NonpositiveRho if params.h >= 0.0 => c,
        RhoSide::NonpositiveRho => (-params.h).max(c),
    })
}

/// Fixed-step RK4 samples of `ψ`, `values[i] = ψ(i·step)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub step: f64,
    pub values: Vec<f64>,
    /// Last time with a finite value below the cap, when the run blew up.
    pub blow_up: Option<f64>,
}

impl Trajectory {
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn last_time(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.time(i), v))
    }
}

pub fn integrate_riccati(params: &ComparisonParams, t_end: f64, step: f64) -> Result<Trajectory> {
    integrate_riccati_capped(params, t_end, step, DEFAULT_BLOW_UP_CAP)
}

pub fn integrate_riccati_capped(params: &ComparisonParams, t_end: f64, step: f64, cap: f64) -> Result<Trajectory> {
    let rk = Rk4::new(params, step)?;
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParams(format!("t_end {t_end} must be finite and >= 0")));
    }
    let steps = (t_end / step).round() as usize;
    let mut values = Vec::with_capacity(steps + 1);
    let mut y = params.h;
    values.push(y);
    for i in 0..steps {
        let next = rk.advance(y);
        if !next.is_finite() || next.abs() >= cap {
            return Ok(Trajectory {
                step,
                values,
                blow_up: Some(i as f64 * step),
            });
        }
        y = next;
        values.push(y);
    }
    Ok(Trajectory {
        step,
        values,
        blow_up: None,
    })
}

/// Classical fourth-order Runge–Kutta step of fixed size for `ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rk4 {
    step: f64,
    inv_n1: f64,
    forcing: f64,
}

impl Rk4 {
    pub fn new(params: &ComparisonParams, step: f64) -> Result<Self> {
        params.validate()?;
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParams(format!("step {step} must be positive")));
        }
        Ok(Self {
            step,
            inv_n1: 1.0 / params.n1(),
            forcing: params.n1() * params.k,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    fn rhs(&self, y: f64) -> f64 {
        self.forcing - y * y * self.inv_n1
    }

    #[inline]
    pub fn advance(&self, y: f64) -> f64 {
        let h = self.step;
        let k1 = self.rhs(y);
        let k2 = self.rhs(y + 0.5 * h * k1);
        let k3 = self.rhs(y + 0.5 * h * k2);
        let k4 = self.rhs(y + h * k3);
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: usize, k: f64, h: f64) -> ComparisonParams {
        ComparisonParams::new(n, k, h).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(psi_closed_form(&p(3, 0.0, 0.0), 5.0).unwrap(), 0.0);
        assert!((psi_closed_form(&p(2, 1.0, 1.0), 0.7).unwrap() - 1.0).abs() < 1e-15);
        assert!((psi_closed_form(&p(3, 0.0, 2.0), 1.0).unwrap() - 1.0).abs() < 1e-15);
        // Frozen from the RK4 oracle at step 1e-5.
        let v = psi_closed_form(&p(2, 1.0, -2.0), 0.25).unwrap();
        assert!((v - -3.440_238_619_835_94).abs() < 1e-10, "{v}");
    }

    #[test]
    fn initial_value_is_exact() {
        for &(n, k, h) in &[(2, 0.3, -1.7), (5, 2.0, 0.1), (3, 0.0, 4.2)] {
            assert_eq!(psi_closed_form(&p(n, k, h), 0.0).unwrap(), h);
        }
    }

    #[test]
    fn existence_time_examples() {
        assert_eq!(max_existence_time(&p(2, 0.0, -1.0)).unwrap(), 1.0);
        assert_eq!(max_existence_time(&p(4, 0.25, 3.0)).unwrap(), f64::INFINITY);
        let t = max_existence_time(&p(2, 1.0, -2.0)).unwrap();
        assert!((t - 0.5f64.atanh()).abs() < 1e-15);
        assert!((t - 0.549_306).abs() < 1e-6);
        // (n−1)√K ≥ −H: the quotient stays finite.
        assert_eq!(max_existence_time(&p(3, 1.0, -2.0)).unwrap(), f64::INFINITY);
        assert_eq!(max_existence_time(&p(3, 0.0, 0.0)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn outside_existence_is_an_error() {
        let q = p(2, 0.0, -1.0);
        assert!(matches!(psi_closed_form(&q, 1.0), Err(Error::OutsideExistence { .. })));
        assert!(matches!(psi_closed_form(&q, -0.1), Err(Error::OutsideExistence { .. })));
        assert!(psi_closed_form(&q, 0.999).is_ok());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ComparisonParams::new(1, 0.0, 0.0).is_err());
        assert!(ComparisonParams::new(2, -1.0, 0.0).is_err());
        assert!(ComparisonParams::new(2, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn envelope_examples() {
        use RhoSide::*;
        assert_eq!(psi_upper_bound(&p(3, 1.0, -5.0), NonnegativeRho).unwrap(), 2.0);
        assert_eq!(psi_upper_bound(&p(3, 0.0, 0.0), NonnegativeRho).unwrap(), 0.0);
        assert_eq!(psi_upper_bound(&p(3, 0.0, 0.0), NonpositiveRho).unwrap(), 0.0);
        assert_eq!(psi_upper_bound(&p(2, 1.0, 4.0), NonnegativeRho).unwrap(), 4.0);
        assert_eq!(psi_upper_bound(&p(2, 1.0, -4.0), NonpositiveRho).unwrap(), 4.0);
        assert_eq!(psi_upper_bound(&p(2, 1.0, 4.0), NonpositiveRho).unwrap(), 1.0);
    }

    #[test]
    fn trajectory_examples() {
        let zero = integrate_riccati(&p(2, 0.0, 0.0), 1.0, 1e-3).unwrap();
        assert_eq!(zero.values.len(), 1001);
        assert!(zero.values.iter().all(|&v| v == 0.0));
        assert!(zero.blow_up.is_none());

        let one = integrate_riccati(&p(2, 1.0, 1.0), 2.0, 1e-3).unwrap();
        assert!(one.values.iter().all(|&v| (v - 1.0).abs() <= 1e-10));

        let q = p(3, 0.0, 2.0);
        let tr = integrate_riccati(&q, 3.0, 1e-3).unwrap();
        for (t, v) in tr.iter() {
            let exact = psi_closed_form(&q, t).unwrap();
            assert!((v - exact).abs() <= 1e-8, "t={t} rk4={v} exact={exact}");
        }
    }

    #[test]
    fn rk4_oracle_value() {
        let tr = integrate_riccati(&p(2, 1.0, -2.0), 0.25, 1e-5).unwrap();
        let v = *tr.values.last().unwrap();
        assert!((v - -3.440_238_619_835_94).abs() < 1e-10);
    }

    #[test]
    fn blow_up_time_matches_existence_time() {
        for &(n, k, h) in &[(2, 0.0, -1.0), (2, 1.0, -2.0), (4, 0.3, -4.5), (6, 0.0, -5.0)] {
            let q = p(n, k, h);
            let t_max = max_existence_time(&q).unwrap();
            let tr = integrate_riccati(&q, t_max + 0.5, 1e-5).unwrap();
            let blow = tr.blow_up.expect("blow-up expected");
            assert!((blow - t_max).abs() <= 1e-4, "{q:?}: {blow} vs {t_max}");
        }
    }

    #[test]
    fn long_time_limit_is_equilibrium() {
        for &(n, k, h) in &[(2, 1.0, 0.0), (3, 4.0, -3.0), (5, 0.25, 7.0)] {
            let q = p(n, k, h);
            let v = psi_closed_form(&q, 50.0 / k.sqrt()).unwrap();
            assert!((v - q.equilibrium()).abs() <= 1e-6);
        }
    }

    #[test]
    fn flat_threshold_uses_flat_formula() {
        let a = psi_closed_form(&p(3, 1e-16, 2.0), 1.0).unwrap();
        assert_eq!(a, 1.0);
        // Continuity in K across the threshold.
        let b = psi_closed_form(&p(3, 1e-10, 2.0), 1.0).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    fn params_strategy() -> impl Strategy<Value = ComparisonParams> {
        (2usize..=6, 0.0f64..4.0, -5.0f64..5.0).prop_map(|(n, k, h)| ComparisonParams { n, k, h })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn psi_stays_below_envelope(q in params_strategy()) {
            let bound = psi_upper_bound(&q, RhoSide::NonnegativeRho).unwrap();
            let t_max = max_existence_time(&q).unwrap();
            let horizon = if t_max.is_finite() { t_max * (1.0 - 1e-9) } else { 20.0 };
            for i in 0..1000 {
                let t = horizon * i as f64 / 1000.0;
                let v = psi_closed_form(&q, t).unwrap();
                prop_assert!(v <= bound * (1.0 + 1e-12) + 1e-12, "t={} psi={} bound={}", t, v, bound);
            }
        }

        #[test]
        fn flat_positive_h_is_nonincreasing(n in 2usize..=6, h in 1e-3f64..5.0) {
            let q = ComparisonParams { n, k: 0.0, h };
            let mut prev = f64::INFINITY;
            for i in 0..1000 {
                let v = psi_closed_form(&q, i as f64 * 0.01).unwrap();
                prop_assert!(v <= prev);
                prev = v;
            }
        }

        #[test]
        fn converges_to_equilibrium(n in 2usize..=6, k in 0.01f64..4.0, s in 0.0f64..1.0) {
            // H > −(n−1)√K
            let c = (n - 1) as f64 * k.sqrt();
            let q = ComparisonParams { n, k, h: -c + s * 2.0 * c + 1e-9 };
            let v = psi_closed_form(&q, 50.0 / k.sqrt()).unwrap();
            prop_assert!((v - c).abs() <= 1e-6);
        }
    }
}
