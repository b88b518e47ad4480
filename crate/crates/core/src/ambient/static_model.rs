use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{Primitive, brent, integrate_adaptive};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaticKind {
    AdsSchwarzschild,
    RnAds,
}

/// Static metric ḡ = ds²/f² + s² g_{𝕊^{dim−1}} with
/// f² = 1 + κ²s² − c·s^{2−dim} + q²s^{4−2dim}.
///
/// AdS-Schwarzschild uses c = m (f² = 1 − m s^{2−n} + s²); RN-AdS uses c = 2m.
#[derive(Debug, Clone)]
pub struct StaticModel {
    pub kind: StaticKind,
    pub mass: f64,
    pub charge: f64,
    pub kappa: f64,
    /// Ambient dimension; the fiber sphere is 𝕊^{dim−1}.
    pub dim: usize,
    pub s0: f64,
    pub s_ref: f64,
    pub s_max: f64,
    c: f64,
    r_of_s: Primitive,
}

pub const DEFAULT_HORIZON_MARGIN: f64 = 1e-2;
pub const DEFAULT_OUTER_FACTOR: f64 = 50.0;

impl StaticModel {
    pub fn ads_schwarzschild(mass: f64, dim: usize) -> Result<Self> {
        Self::build(StaticKind::AdsSchwarzschild, mass, 0.0, 1.0, dim, DEFAULT_HORIZON_MARGIN, DEFAULT_OUTER_FACTOR)
    }

    pub fn rn_ads(mass: f64, charge: f64, kappa: f64, dim: usize) -> Result<Self> {
        Self::build(StaticKind::RnAds, mass, charge, kappa, dim, DEFAULT_HORIZON_MARGIN, DEFAULT_OUTER_FACTOR)
    }

    pub fn build(
        kind: StaticKind,
        mass: f64,
        charge: f64,
        kappa: f64,
        dim: usize,
        margin: f64,
        outer_factor: f64,
    ) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Config(format!("static models need dim ≥ 3 (got {dim})")));
        }
        if !(mass > 0.0) || !(kappa > 0.0) || !(charge >= 0.0) {
            return Err(Error::Config("static model needs m > 0, κ > 0, q ≥ 0".into()));
        }
        if kind == StaticKind::RnAds && !(charge < mass) {
            return Err(Error::Config(format!("RN-AdS needs q < m (q = {charge}, m = {mass})")));
        }
        if kind == StaticKind::AdsSchwarzschild && (charge != 0.0 || kappa != 1.0) {
            return Err(Error::Config("AdS-Schwarzschild has q = 0, κ = 1".into()));
        }
        if !(margin > 0.0) || !(outer_factor > 1.0 + margin) {
            return Err(Error::Config("horizon margin must be positive and below the outer factor".into()));
        }
        let c = match kind {
            StaticKind::AdsSchwarzschild => mass,
            StaticKind::RnAds => 2.0 * mass,
        };
        let probe = Probe { c, q2: charge * charge, k2: kappa * kappa, dim };
        let s0 = probe.horizon()?;
        let s_ref = s0 * (1.0 + margin);
        let s_max = s0 * outer_factor;
        // geometric clustering toward the horizon, where 1/f varies fastest
        let count = 400;
        let ratio = (s_max - s0) / (s_ref - s0);
        let knots: Vec<f64> =
            (0..=count).map(|i| if i == count { s_max } else { s0 + (s_ref - s0) * ratio.powf(i as f64 / count as f64) }).collect();
        let p = probe;
        let r_of_s = Primitive::build(knots, Arc::new(move |s| 1.0 / p.f2(s).sqrt()), 1e-13)?;
        Ok(Self { kind, mass, charge, kappa, dim, s0, s_ref, s_max, c, r_of_s })
    }

    fn probe(&self) -> Probe {
        Probe { c: self.c, q2: self.charge * self.charge, k2: self.kappa * self.kappa, dim: self.dim }
    }

    /// Fiber dimension of the warped form.
    pub fn fiber_dim(&self) -> usize {
        self.dim - 1
    }

    /// Coefficient of s^{2−dim} in f².
    pub fn mass_coefficient(&self) -> f64 {
        self.c
    }

    /// (F, F′, F″) with F = f².
    pub fn f2_derivs(&self, s: f64) -> (f64, f64, f64) {
        self.probe().f2_derivs(s)
    }

    /// 2τ / f(s0 + τ²), the Jacobian of the horizon substitution; finite as τ → 0.
    pub fn dsdtau_over_f(&self, tau: f64) -> f64 {
        let s = self.s0 + tau * tau;
        let (big, _, _) = self.f2_derivs(s);
        if tau < 1e-4 || !(big > 0.0) {
            // F ≈ F′(s0) τ² near the horizon
            let (_, d0, _) = self.f2_derivs(self.s0);
            return 2.0 / d0.sqrt();
        }
        2.0 * tau / big.sqrt()
    }

    /// (f, f′, f″).
    pub fn f(&self, s: f64) -> (f64, f64, f64) {
        let (big, d1, d2) = self.f2_derivs(s);
        let f = big.max(0.0).sqrt();
        let fp = d1 / (2.0 * f);
        let fpp = (0.5 * d2 - fp * fp) / f;
        (f, fp, fpp)
    }

    pub fn r_max(&self) -> f64 {
        self.r_of_s.total()
    }

    /// r(s) = ∫_{s_ref}^s ds′/f.
    pub fn warp_coordinate(&self, s: f64) -> Result<f64> {
        if !(s > self.s0) {
            return Err(Error::Horizon(format!("s = {s} is not above the horizon s0 = {}", self.s0)));
        }
        if s < self.s_ref || s > self.s_max {
            return Err(Error::Domain(format!("s = {s} outside [{}, {}]", self.s_ref, self.s_max)));
        }
        self.r_of_s.eval(s)
    }

    pub fn s_of_r(&self, r: f64) -> Result<f64> {
        self.r_of_s.invert(r)
    }

    /// Independent evaluation of r(s) by a single adaptive quadrature (test oracle use).
    pub fn warp_coordinate_direct(&self, s: f64, tol: f64) -> Result<f64> {
        let p = self.probe();
        integrate_adaptive(|t| 1.0 / p.f2(t).sqrt(), self.s_ref, s, tol, tol)
    }

    /// Δ̄f for f depending on s only: f·((dim−1)F′/(2s) + F″/2).
    pub fn laplacian_f(&self, s: f64) -> f64 {
        let (big, d1, d2) = self.f2_derivs(s);
        let n = self.dim as f64;
        big.sqrt() * ((n - 1.0) * d1 / (2.0 * s) + 0.5 * d2)
    }

    /// Scalar curvature R̄ = (dim−1)[(dim−2)(1−F)/s² − F′/s].
    pub fn scalar_curvature(&self, s: f64) -> f64 {
        let (big, d1, _) = self.f2_derivs(s);
        let n = self.dim as f64;
        (n - 1.0) * ((n - 2.0) * (1.0 - big) / (s * s) - d1 / s)
    }

    /// Residual of the static equation's trace at s:
    /// (dim−1)Δ̄f + f R̄ − (dim−2)(dim−1)² q² f s^{2−2dim}; for q = 0, κ = 1 also Δ̄f − dim·f.
    pub fn trace_residual(&self, s: f64) -> f64 {
        let n = self.dim as f64;
        let (f, _, _) = self.f(s);
        let q2 = self.charge * self.charge;
        (n - 1.0) * self.laplacian_f(s) + f * self.scalar_curvature(s)
            - (n - 2.0) * (n - 1.0).powi(2) * q2 * f * s.powf(2.0 - 2.0 * n)
    }
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    c: f64,
    q2: f64,
    k2: f64,
    dim: usize,
}

impl Probe {
    fn f2(&self, s: f64) -> f64 {
        let n = self.dim as i32;
        1.0 + self.k2 * s * s - self.c * s.powi(2 - n) + self.q2 * s.powi(4 - 2 * n)
    }

    fn f2_derivs(&self, s: f64) -> (f64, f64, f64) {
        let n = self.dim as i32;
        let nf = n as f64;
        let big = self.f2(s);
        let d1 = 2.0 * self.k2 * s - self.c * (2.0 - nf) * s.powi(1 - n) + self.q2 * (4.0 - 2.0 * nf) * s.powi(3 - 2 * n);
        let d2 = 2.0 * self.k2 - self.c * (2.0 - nf) * (1.0 - nf) * s.powi(-n)
            + self.q2 * (4.0 - 2.0 * nf) * (3.0 - 2.0 * nf) * s.powi(2 - 2 * n);
        (big, d1, d2)
    }

    /// Largest positive root of f².
    fn horizon(&self) -> Result<f64> {
        let mut hi = 1.0;
        while self.f2(hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::Config("f² has no positive region".into()));
            }
        }
        let mut s = hi;
        loop {
            let next = s * 0.98;
            if next < 1e-8 {
                return Err(Error::Config("static model has no horizon (f² > 0 near 0)".into()));
            }
            if self.f2(next) <= 0.0 {
                return brent(|x| self.f2(x), next, s, 1e-15);
            }
            s = next;
        }
    }
}
