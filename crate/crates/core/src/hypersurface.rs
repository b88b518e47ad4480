//! Radial graphs Σ = {(r(y), y)} and their pointwise geometry, computed two ways.
//!
//! Intrinsic path. With Dr, ∇²r the σ-covariant derivatives (orthonormal frame),
//!   g = λ²σ + Dr⊗Dr,  v = √(1 + λ⁻²|Dr|²),  ν = (∂_r − λ⁻² Dr^♯)/v,
//!   h = (λλ′σ + 2(λ′/λ) Dr⊗Dr − ∇²r)/v,
//! which follows from ∇̄_{∂_i}∂_j = −λλ′σ_ij ∂_r + (fiber Christoffels), ∇̄_{∂_i}∂_r = (λ′/λ)∂_i.
//!
//! Conformal path. ψ = log ρ(r) turns the surface into the Euclidean radial graph e^ψ y with
//!   g̃ = e^{2ψ}(σ + Dψ⊗Dψ),  h̃ = e^ψ(σ + Dψ⊗Dψ − ∇²ψ)/ṽ,  ṽ = √(1 + |Dψ|²),
//! and the shape operators are related by e^ω W = W̃ + ω_ν̃ I with ω_ν̃ = (λ′ − 1)/(ρ ṽ).
//!
//! Both paths return the shape operator in a g-orthonormal frame aligned with Dr.

use std::sync::Arc;

use crate::ambient::{Warp, WarpedSpace};
use crate::error::{Error, Result, ensure_finite};
use crate::spheregrid::{GridMode, SphereGrid, SymTensor};

/// Relative spectral-tail limit (energy above 3/4 of the band) for admissible graphs.
pub const DEFAULT_TAIL_LIMIT: f64 = 1e-3;
pub const TAIL_FRACTION: f64 = 0.75;

#[derive(Debug, Clone)]
pub struct GraphSurface {
    grid: Arc<SphereGrid>,
    space: Arc<WarpedSpace>,
    r: Vec<f64>,
}

impl GraphSurface {
    pub fn new(grid: Arc<SphereGrid>, space: Arc<WarpedSpace>, r: Vec<f64>) -> Result<Self> {
        let s = Self::unchecked(grid, space, r)?;
        s.check_smoothness(DEFAULT_TAIL_LIMIT)?;
        Ok(s)
    }

    /// Validates shape and range but skips the spectral-tail check.
    pub fn unchecked(grid: Arc<SphereGrid>, space: Arc<WarpedSpace>, r: Vec<f64>) -> Result<Self> {
        if grid.dim() != space.n() {
            return Err(Error::Config(format!("grid is 𝕊^{} but space fiber is 𝕊^{}", grid.dim(), space.n())));
        }
        if r.len() != grid.len() {
            return Err(Error::Config(format!("{} radii for {} nodes", r.len(), grid.len())));
        }
        ensure_finite(&r, "radial function")?;
        let (lo, hi) = space.working_range();
        if let Some((i, v)) = r.iter().enumerate().find(|(_, v)| !(**v >= lo && **v <= hi)) {
            return Err(Error::Domain(format!("r = {v} at node {i} outside working range [{lo}, {hi}]")));
        }
        Ok(Self { grid, space, r })
    }

    pub fn slice(grid: Arc<SphereGrid>, space: Arc<WarpedSpace>, r0: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, space, vec![r0; n])
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Arc<SphereGrid>, space: Arc<WarpedSpace>, f: F) -> Result<Self> {
        let r = grid.sample(f);
        Self::new(grid, space, r)
    }

    pub fn with_r(&self, r: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), self.space.clone(), r)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn space(&self) -> &Arc<WarpedSpace> {
        &self.space
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn r_min(&self) -> f64 {
        self.r.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn r_max(&self) -> f64 {
        self.r.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Relative energy of r above 3/4 of the resolved band.
    pub fn tail_fraction(&self) -> Result<f64> {
        let (tail, total) = self.grid.spectral_tail(&self.r, TAIL_FRACTION)?;
        Ok(if total > 0.0 { tail / total } else { 0.0 })
    }

    pub fn check_smoothness(&self, limit: f64) -> Result<()> {
        let t = self.tail_fraction()?;
        if t > limit {
            return Err(Error::Numeric(format!("graph under-resolved: spectral tail fraction {t:e} > {limit:e}")));
        }
        Ok(())
    }
}

/// Principal curvatures at one node, ascending, with multiplicities summing to n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Principal {
    pub values: [f64; 2],
    pub mult: [usize; 2],
}

impl Principal {
    pub fn min(&self) -> f64 {
        if self.mult[0] > 0 { self.values[0] } else { self.values[1] }
    }

    pub fn max(&self) -> f64 {
        if self.mult[1] > 0 { self.values[1] } else { self.values[0] }
    }
}

#[derive(Debug, Clone)]
pub struct GeometryFields {
    pub n: usize,
    /// Area density relative to σ: λⁿ v.
    pub dmu: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub nu_r: Vec<f64>,
    /// Fiber components of ν in a ḡ-orthonormal frame.
    pub nu_tan: Vec<[f64; 2]>,
    /// Shape operator in a g-orthonormal frame (first axis along Dr).
    pub h: Vec<SymTensor>,
    pub kappa: Vec<Principal>,
    pub mean: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub a2: Vec<f64>,
    pub aring2: Vec<f64>,
    pub warp: Vec<Warp>,
}

impl GeometryFields {
    pub fn len(&self) -> usize {
        self.dmu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dmu.is_empty()
    }

    /// ∫_Σ g dμ for a per-node integrand.
    pub fn integrate<F: Fn(usize) -> f64>(&self, grid: &SphereGrid, g: F) -> f64 {
        grid.weights().iter().enumerate().map(|(i, w)| w * self.dmu[i] * g(i)).sum()
    }

    pub fn area(&self, grid: &SphereGrid) -> f64 {
        self.integrate(grid, |_| 1.0)
    }

    pub fn sup_aring(&self) -> f64 {
        self.aring2.iter().fold(0.0f64, |m, a| m.max(a.max(0.0).sqrt()))
    }

    pub fn min_kappa(&self) -> f64 {
        self.kappa.iter().map(|k| k.min()).fold(f64::INFINITY, f64::min)
    }
}

/// Shape-operator inputs at one node before diagonalization.
struct NodeShape {
    /// (ee, e⊥, ⊥⊥) block of the shape operator.
    w: SymTensor,
}

fn frame_components(t: &SymTensor, d: [f64; 2]) -> (SymTensor, [f64; 2]) {
    let m = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let (c, s) = if m > 0.0 { (d[0] / m, d[1] / m) } else { (1.0, 0.0) };
    // rotate (θ, φ) → (ê, ê⊥), ê = (c, s), ê⊥ = (−s, c)
    let ee = c * c * t.tt + 2.0 * c * s * t.tp + s * s * t.pp;
    let ep = -c * s * t.tt + (c * c - s * s) * t.tp + c * s * t.pp;
    let pp = s * s * t.tt - 2.0 * c * s * t.tp + c * c * t.pp;
    (SymTensor { tt: ee, tp: ep, pp }, [c, s])
}

fn finish(
    grid: &SphereGrid,
    shapes: Vec<NodeShape>,
    v: Vec<f64>,
    warp: Vec<Warp>,
    nu_tan: Vec<[f64; 2]>,
) -> Result<GeometryFields> {
    let n = grid.dim();
    let nf = n as f64;
    let axisym = grid.mode() == GridMode::Axisym;
    let len = shapes.len();
    let mut out = GeometryFields {
        n,
        dmu: Vec::with_capacity(len),
        v,
        u: Vec::with_capacity(len),
        nu_r: Vec::with_capacity(len),
        nu_tan,
        h: Vec::with_capacity(len),
        kappa: Vec::with_capacity(len),
        mean: Vec::with_capacity(len),
        h1: Vec::with_capacity(len),
        h2: Vec::with_capacity(len),
        a2: Vec::with_capacity(len),
        aring2: Vec::with_capacity(len),
        warp,
    };
    for (i, sh) in shapes.into_iter().enumerate() {
        let w = sh.w;
        let lam = out.warp[i].lambda;
        let vi = out.v[i];
        let (values, mult) = if axisym {
            ([w.tt, w.pp], [1usize, n - 1])
        } else {
            let mean = 0.5 * (w.tt + w.pp);
            let rad = (0.25 * (w.tt - w.pp).powi(2) + w.tp * w.tp).sqrt();
            ([mean - rad, mean + rad], [1usize, 1])
        };
        let p = if values[0] <= values[1] {
            Principal { values, mult }
        } else {
            Principal { values: [values[1], values[0]], mult: [mult[1], mult[0]] }
        };
        let (k0, k1) = (p.values[0], p.values[1]);
        let (m0, m1) = (p.mult[0] as f64, p.mult[1] as f64);
        let hh = m0 * k0 + m1 * k1;
        let a2 = m0 * k0 * k0 + m1 * k1 * k1;
        let h1 = hh / nf;
        let aring2 = m0 * (k0 - h1).powi(2) + m1 * (k1 - h1).powi(2);
        let sigma2 = 0.5 * m0 * (m0 - 1.0) * k0 * k0 + 0.5 * m1 * (m1 - 1.0) * k1 * k1 + m0 * m1 * k0 * k1;
        out.dmu.push(lam.powi(n as i32) * vi);
        out.u.push(lam / vi);
        out.nu_r.push(1.0 / vi);
        out.h.push(w);
        out.kappa.push(p);
        out.mean.push(hh);
        out.h1.push(h1);
        out.h2.push(sigma2 / (0.5 * nf * (nf - 1.0)));
        out.a2.push(a2);
        out.aring2.push(aring2);
    }
    for (name, field) in [("H", &out.mean), ("|A|²", &out.a2), ("dμ", &out.dmu)] {
        ensure_finite(field, name)?;
    }
    Ok(out)
}

fn warps(surface: &GraphSurface) -> Result<Vec<Warp>> {
    surface.r.iter().map(|&r| surface.space.eval(r)).collect()
}

pub fn geometry_intrinsic(surface: &GraphSurface) -> Result<GeometryFields> {
    let grid = &surface.grid;
    let der = grid.derivatives(&surface.r)?;
    let warp = warps(surface)?;
    let len = grid.len();
    let mut shapes = Vec::with_capacity(len);
    let mut v = Vec::with_capacity(len);
    let mut nu_tan = Vec::with_capacity(len);
    for i in 0..len {
        let Warp { lambda: l, dlambda: dl, .. } = warp[i];
        if !(l > 0.0) {
            return Err(Error::Singular(format!("λ = {l} at node {i}")));
        }
        let d = der.grad[i];
        let hs = der.hess[i];
        let m2 = d[0] * d[0] + d[1] * d[1];
        let vi = (1.0 + m2 / (l * l)).sqrt();
        let (hf, _) = frame_components(&hs, d);
        // in the (ê, ê⊥) frame Dr = (|Dr|, 0)
        let ll = l * dl;
        let h_ee = (ll + 2.0 * dl / l * m2 - hf.tt) / vi;
        let h_ep = -hf.tp / vi;
        let h_pp = (ll - hf.pp) / vi;
        let ge = (l * l + m2).sqrt();
        shapes.push(NodeShape { w: SymTensor { tt: h_ee / (ge * ge), tp: h_ep / (l * ge), pp: h_pp / (l * l) } });
        v.push(vi);
        nu_tan.push([-d[0] / (l * vi), -d[1] / (l * vi)]);
    }
    finish(grid, shapes, v, warp, nu_tan)
}

/// Options for the conformal path. `omega_sign` multiplies the ω_ν̃ term of the
/// transformation law; it is 1 for the correct law and exists for mutation testing.
#[derive(Debug, Clone, Copy)]
pub struct ConformalOptions {
    pub omega_sign: f64,
}

impl Default for ConformalOptions {
    fn default() -> Self {
        Self { omega_sign: 1.0 }
    }
}

pub fn geometry_conformal(surface: &GraphSurface) -> Result<GeometryFields> {
    geometry_conformal_with(surface, ConformalOptions::default())
}

pub fn geometry_conformal_with(surface: &GraphSurface, opts: ConformalOptions) -> Result<GeometryFields> {
    let grid = &surface.grid;
    let space = &surface.space;
    let flat = surface.r.iter().map(|&r| space.flatten(r)).collect::<Result<Vec<_>>>()?;
    let psi: Vec<f64> = flat.iter().map(|f| f.rho.ln()).collect();
    let der = grid.derivatives(&psi)?;
    let warp = warps(surface)?;
    let len = grid.len();
    let mut shapes = Vec::with_capacity(len);
    let mut v = Vec::with_capacity(len);
    let mut nu_tan = Vec::with_capacity(len);
    for i in 0..len {
        let rho = flat[i].rho;
        let d = der.grad[i];
        let m2 = d[0] * d[0] + d[1] * d[1];
        let vt = (1.0 + m2).sqrt();
        let (hf, _) = frame_components(&der.hess[i], d);
        // Euclidean second fundamental form in the (ê, ê⊥) frame
        let ht_ee = rho * (1.0 + m2 - hf.tt) / vt;
        let ht_ep = -rho * hf.tp / vt;
        let ht_pp = rho * (1.0 - hf.pp) / vt;
        let g_ee = rho * rho * (1.0 + m2);
        let g_pp = rho * rho;
        let wt = SymTensor { tt: ht_ee / g_ee, tp: ht_ep / (g_ee * g_pp).sqrt(), pp: ht_pp / g_pp };
        let Warp { lambda: l, dlambda: dl, .. } = warp[i];
        let omega_nu = opts.omega_sign * (dl - 1.0) / (rho * vt);
        let e = rho / l; // e^{−ω}
        shapes.push(NodeShape { w: SymTensor { tt: e * (wt.tt + omega_nu), tp: e * wt.tp, pp: e * (wt.pp + omega_nu) } });
        v.push(vt);
        nu_tan.push([-d[0] / vt, -d[1] / vt]);
    }
    finish(grid, shapes, v, warp, nu_tan)
}

/// ∫ u H₁ dμ − ∫ λ′ dμ.
pub fn minkowski_residual(surface: &GraphSurface, fields: &GeometryFields) -> f64 {
    let g = surface.grid();
    fields.integrate(g, |i| fields.u[i] * fields.h1[i] - fields.warp[i].dlambda)
}

/// Ric(ν, ∇Θ) with ∇Θ the tangential gradient of the primitive Θ of λ on Σ:
/// ∇Θ = λ∂_r − uν, so Ric(ν, ∇Θ) = u(1 − v⁻²)(Ric_rr − Ric_tan).
pub fn ricci_nu_grad_theta(space: &WarpedSpace, fields: &GeometryFields, i: usize) -> f64 {
    let w = &fields.warp[i];
    let n = space.n() as f64;
    let rr = -n * w.d2lambda / w.lambda;
    let tan = space.ricci_tangential(w);
    let v = fields.v[i];
    fields.u[i] * (1.0 - 1.0 / (v * v)) * (rr - tan)
}

/// ∫ uH₂ dμ − ∫ λ′H₁ dμ + (1/(n(n−1))) ∫ Ric(ν, ∇Θ) dμ.
pub fn second_minkowski_residual(surface: &GraphSurface, fields: &GeometryFields) -> f64 {
    let g = surface.grid();
    let space = surface.space();
    let n = space.n() as f64;
    fields.integrate(g, |i| {
        fields.u[i] * fields.h2[i] - fields.warp[i].dlambda * fields.h1[i]
            + ricci_nu_grad_theta(space, fields, i) / (n * (n - 1.0))
    })
}

/// min over nodes of the smallest principal curvature.
pub fn convexity_margin(fields: &GeometryFields) -> f64 {
    fields.min_kappa()
}
