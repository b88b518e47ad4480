//! Conformal image in Euclidean space, radial-graph fitting, Sobolev-type norms
//! of the graph function and the stability-exponent bookkeeping.
//!
//! The distance to the nearest slice is measured in the r coordinate: r is
//! arclength along the radial geodesics of dr² + λ²g, and the nearest point of
//! S_ρ to (r, y) is (ρ, y), so dist(Σ, S_ρ) = max_y |r(y) − ρ| and the best ρ is
//! the midrange.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ambient::{Model, SpaceOptions, WarpedSpace};
use crate::error::{Error, Result};
use crate::functionals::aring_lp;
use crate::hypersurface::{geometry_intrinsic, GeometryFields, GraphSurface};
use crate::numerics::brent;
use crate::spheregrid::{GridMode, SphereGrid};

const FIT_MAX_ITER: usize = 100;
const FIT_TOL: f64 = 1e-10;
const RAY_SCAN: usize = 24;

/// A radial graph X̃(y) = ρ(y)·y in ℝ^{n+1} together with the conformal factor
/// at each node (zero for clouds that did not come from a warped space).
#[derive(Debug, Clone)]
pub struct EuclideanImage {
    pub grid: Arc<SphereGrid>,
    pub rho: Vec<f64>,
    pub omega: Vec<f64>,
    /// Factor applied by volume normalization (1 if none).
    pub scale: f64,
}

impl EuclideanImage {
    pub fn from_radial(grid: Arc<SphereGrid>, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != grid.len() {
            return Err(Error::Config(format!("radial function has {} values, grid has {}", rho.len(), grid.len())));
        }
        if let Some(bad) = rho.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::Domain(format!("radial function must be positive and finite (found {bad})")));
        }
        let omega = vec![0.0; rho.len()];
        Ok(Self { grid, rho, omega, scale: 1.0 })
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        (0..self.rho.len())
            .map(|i| {
                let y = self.grid.direction(i);
                [self.rho[i] * y[0], self.rho[i] * y[1], self.rho[i] * y[2]]
            })
            .collect()
    }

    pub fn sup_omega(&self) -> f64 {
        self.omega.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }

    /// Euclidean volume enclosed: ∫ ρ^{n+1}/(n+1) dσ.
    pub fn enclosed_volume(&self) -> f64 {
        let n1 = (self.grid.dim() + 1) as f64;
        let field: Vec<f64> = self.rho.iter().map(|r| r.powf(n1) / n1).collect();
        self.grid.integrate_unchecked(&field)
    }

    /// Rescales so that the enclosed volume equals that of the unit ball.
    pub fn normalize_volume(&mut self) {
        let n1 = (self.grid.dim() + 1) as f64;
        let ball = self.grid.area() / n1;
        let k = (ball / self.enclosed_volume()).powf(1.0 / n1);
        self.rho.iter_mut().for_each(|r| *r *= k);
        self.scale *= k;
    }

    /// The image as a graph in flat space, for Euclidean curvature.
    pub fn as_flat_surface(&self) -> Result<GraphSurface> {
        let top = self.rho.iter().cloned().fold(0.0, f64::max);
        let opts = SpaceOptions { domain: Some((0.0, (4.0 * top).max(10.0))), ..Default::default() };
        let space = WarpedSpace::from_model(&Model::Flat, self.grid.dim(), &opts)?;
        GraphSurface::new(self.grid.clone(), Arc::new(space), self.rho.clone())
    }

    pub fn euclidean_fields(&self) -> Result<GeometryFields> {
        geometry_intrinsic(&self.as_flat_surface()?)
    }
}

/// X̃ = ρ(r)·y with ω = log λ − log ρ recorded per node.
pub fn to_euclidean(surface: &GraphSurface) -> Result<EuclideanImage> {
    let space = surface.space();
    let mut rho = Vec::with_capacity(surface.r().len());
    let mut omega = Vec::with_capacity(surface.r().len());
    for &r in surface.r() {
        let fl = space.flatten(r)?;
        rho.push(fl.rho);
        omega.push(fl.omega);
    }
    let mut img = EuclideanImage::from_radial(surface.grid().clone(), rho)?;
    img.omega = omega;
    Ok(img)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialFit {
    pub center: [f64; 3],
    /// f(y) = log|X̃ − c| along the ray from c in direction y, at every grid node.
    pub f: Vec<f64>,
    /// ∮ f dσ / |𝕊ⁿ|.
    pub mean_f: f64,
    /// max_y |f − mean f| at the nodes.
    pub oscillation: f64,
    pub iterations: usize,
}

struct RayCaster<'a> {
    grid: &'a SphereGrid,
    interp: crate::spheregrid::Interpolator<'a>,
    rho_max: f64,
}

impl<'a> RayCaster<'a> {
    fn new(img: &'a EuclideanImage) -> Self {
        let rho_max = img.rho.iter().cloned().fold(0.0, f64::max);
        Self { grid: &img.grid, interp: img.grid.interpolator(&img.rho), rho_max }
    }

    fn rho_at(&self, p: [f64; 3]) -> (f64, f64) {
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let (theta, phi) = match self.grid.mode() {
            GridMode::Axisym => ((p[0].abs()).atan2(p[2]), 0.0),
            GridMode::Full => ((p[0].hypot(p[1])).atan2(p[2]), p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU)),
        };
        (norm, self.interp.eval(theta, phi))
    }

    /// Distance from c to the surface along direction y; the ray must cross exactly once.
    fn cast(&self, c: [f64; 3], y: [f64; 3]) -> Result<f64> {
        let g = |t: f64| {
            let (norm, rho) = self.rho_at([c[0] + t * y[0], c[1] + t * y[1], c[2] + t * y[2]]);
            norm - rho
        };
        let cn = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        let t_max = 2.0 * self.rho_max + cn;
        let mut prev = g(0.0);
        if !(prev < 0.0) {
            return Err(Error::Fit(format!("center {c:?} is not inside the surface")));
        }
        let mut bracket = None;
        for k in 1..=RAY_SCAN {
            let t = t_max * k as f64 / RAY_SCAN as f64;
            let cur = g(t);
            if cur >= 0.0 && prev < 0.0 {
                if bracket.is_some() {
                    return Err(Error::Fit("surface is not star-shaped about the center".into()));
                }
                bracket = Some((t_max * (k - 1) as f64 / RAY_SCAN as f64, t));
            } else if cur < 0.0 && prev >= 0.0 {
                return Err(Error::Fit("surface is not star-shaped about the center".into()));
            }
            prev = cur;
        }
        let (a, b) = bracket.ok_or_else(|| Error::Fit("ray never leaves the surface".into()))?;
        brent(g, a, b, 1e-15)
    }

    fn log_radii(&self, c: [f64; 3]) -> Result<Vec<f64>> {
        (0..self.grid.len()).map(|j| Ok(self.cast(c, self.grid.direction(j))?.ln())).collect()
    }
}

fn weighted_residual(grid: &SphereGrid, f: &[f64]) -> (Vec<f64>, f64) {
    let mean = grid.integrate_unchecked(f) / grid.area();
    let res = f.iter().zip(grid.weights()).map(|(v, w)| w.sqrt() * (v - mean)).collect();
    (res, mean)
}

/// Fits X̃ = c + e^{f(y)}y. The center minimizes the L²(dσ) oscillation of
/// log|X̃ − c| by Gauss–Newton from the area centroid; this vanishes exactly on
/// round spheres and is equivariant under rigid motions. On axisymmetric grids the
/// center stays on the axis.
pub fn fit_radial_graph(img: &EuclideanImage) -> Result<RadialFit> {
    let grid = &*img.grid;
    let caster = RayCaster::new(img);
    let mut c = area_centroid(img)?;
    let axes: Vec<usize> = match grid.mode() {
        GridMode::Axisym => vec![2],
        GridMode::Full => vec![0, 1, 2],
    };
    let scale = caster.rho_max;
    let mut f = caster.log_radii(c)?;
    let mut iterations = 0;
    for it in 0..FIT_MAX_ITER {
        iterations = it + 1;
        let (res, _) = weighted_residual(grid, &f);
        let h = 1e-6 * scale;
        let mut jac = Vec::with_capacity(axes.len());
        for &a in &axes {
            let mut cp = c;
            cp[a] += h;
            let mut cm = c;
            cm[a] -= h;
            let (rp, _) = weighted_residual(grid, &caster.log_radii(cp)?);
            let (rm, _) = weighted_residual(grid, &caster.log_radii(cm)?);
            jac.push(rp.iter().zip(&rm).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<f64>>());
        }
        let k = axes.len();
        let mut ata = [[0.0; 3]; 3];
        let mut atb = [0.0; 3];
        for a in 0..k {
            for b in 0..k {
                ata[a][b] = jac[a].iter().zip(&jac[b]).map(|(x, y)| x * y).sum();
            }
            atb[a] = -jac[a].iter().zip(&res).map(|(x, y)| x * y).sum::<f64>();
        }
        let delta = solve_small(&ata, &atb, k).ok_or_else(|| Error::Fit("degenerate center fit".into()))?;
        let step: f64 = delta[..k].iter().map(|d| d * d).sum::<f64>().sqrt();
        let old = res.iter().map(|r| r * r).sum::<f64>();
        // damped update: halve until the objective does not grow
        let mut t = 1.0;
        loop {
            let mut trial = c;
            for (j, &a) in axes.iter().enumerate() {
                trial[a] += t * delta[j];
            }
            if let Ok(ft) = caster.log_radii(trial) {
                let (rt, _) = weighted_residual(grid, &ft);
                if rt.iter().map(|r| r * r).sum::<f64>() <= old * (1.0 + 1e-12) + 1e-300 {
                    c = trial;
                    f = ft;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                break;
            }
        }
        if step * t < FIT_TOL * scale.max(1.0) || t < 1e-6 {
            break;
        }
    }
    let (_, mean_f) = weighted_residual(grid, &f);
    let oscillation = f.iter().fold(0.0f64, |m, v| m.max((v - mean_f).abs()));
    Ok(RadialFit { center: c, f, mean_f, oscillation, iterations })
}

fn solve_small(a: &[[f64; 3]; 3], b: &[f64; 3], k: usize) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..k {
        m[i][..k].copy_from_slice(&a[i][..k]);
        m[i][3] = b[i];
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if !(m[piv][col].abs() > 0.0) {
            return None;
        }
        m.swap(col, piv);
        for row in 0..k {
            if row != col {
                let fac = m[row][col] / m[col][col];
                for j in col..4 {
                    m[row][j] -= fac * m[col][j];
                }
            }
        }
    }
    let mut x = [0.0; 3];
    for i in 0..k {
        x[i] = m[i][3] / m[i][i];
    }
    Some(x)
}

/// ∫ X̃ dA / ∫ dA with the Euclidean area element of the image.
pub fn area_centroid(img: &EuclideanImage) -> Result<[f64; 3]> {
    let fields = img.euclidean_fields()?;
    let pts = img.points();
    let area = fields.area(&img.grid);
    let mut c = [0.0; 3];
    for (a, slot) in c.iter_mut().enumerate() {
        *slot = fields.integrate(&img.grid, |i| fields.dmu[i] * pts[i][a]) / area;
    }
    if img.grid.mode() == GridMode::Axisym {
        c[0] = 0.0;
        c[1] = 0.0;
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GraphNorms {
    pub p: f64,
    pub raw: f64,
    /// Norm of f − mean f (invariant under rescaling of the image).
    pub mean_subtracted: f64,
}

/// (∫ |f|^p + |∇f|^p + |∇²f|^p dσ)^{1/p}, with the plain and mean-subtracted f.
pub fn graph_norms(grid: &SphereGrid, f: &[f64], p: f64) -> Result<GraphNorms> {
    let mean = grid.integrate(f)? / grid.area();
    let der = grid.derivatives(f)?;
    let n = grid.dim();
    let deriv_part: Vec<f64> = (0..f.len())
        .map(|i| {
            let g = der.grad[i];
            (g[0] * g[0] + g[1] * g[1]).sqrt().powf(p) + der.hess[i].norm2(n).max(0.0).sqrt().powf(p)
        })
        .collect();
    let norm = |shift: f64| {
        let field: Vec<f64> = f.iter().zip(&deriv_part).map(|(v, d)| (v - shift).abs().powf(p) + d).collect();
        grid.integrate_unchecked(&field).max(0.0).powf(1.0 / p)
    };
    Ok(GraphNorms { p, raw: norm(0.0), mean_subtracted: norm(mean) })
}

/// ‖Å‖_{L^p(dμ)}.
pub fn traceless_norm(grid: &SphereGrid, fields: &GeometryFields, p: f64) -> f64 {
    aring_lp(grid, fields, p)
}

/// Midrange slice and the ambient distance to it.
pub fn slice_distance(surface: &GraphSurface) -> (f64, f64) {
    let (lo, hi) = radial_extremes(surface);
    (0.5 * (lo + hi), 0.5 * (hi - lo))
}

// Gauss nodes miss the poles, so the node extremes of r can undershoot; add the
// interpolated pole values and, on zonal grids, polish the extremes between nodes.
fn radial_extremes(surface: &GraphSurface) -> (f64, f64) {
    let grid = surface.grid();
    let r = surface.r();
    let interp = grid.interpolator(r);
    let (mut lo, mut hi) = (surface.r_min(), surface.r_max());
    for pole in [0.0, std::f64::consts::PI] {
        let v = interp.eval(pole, 0.0);
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if grid.mode() == GridMode::Axisym {
        let nodes = grid.theta_nodes();
        for sign in [1.0, -1.0] {
            let k = (0..r.len()).max_by(|&a, &b| (sign * r[a]).total_cmp(&(sign * r[b]))).unwrap_or(0);
            let a = if k == 0 { 0.0 } else { nodes[k - 1] };
            let b = if k + 1 == nodes.len() { std::f64::consts::PI } else { nodes[k + 1] };
            let v = sign * golden_max(|t| sign * interp.eval(t, 0.0), a, b);
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    (lo, hi)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub epsilon: f64,
    pub aring_lp: f64,
    pub dist_slice: f64,
    pub f_norm: f64,
    /// dist / ε^{1/(2(n+1))}; absent when ε vanishes.
    pub fitted_c: Option<f64>,
    pub exponent_observed: Option<f64>,
    /// f_norm / ‖Å‖_{L^p}; absent when ‖Å‖ vanishes.
    pub norm_ratio: Option<f64>,
    pub flags: Vec<String>,
    pub violation: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct StabilityInputs {
    pub n: usize,
    pub epsilon: f64,
    pub aring_lp: f64,
    pub dist_slice: f64,
    pub f_norm: f64,
    /// Tolerance below which ε and dist count as zero.
    pub tol: f64,
    pub bound: Option<f64>,
}

pub fn stability_exponent(n: usize) -> f64 {
    1.0 / (2.0 * (n as f64 + 1.0))
}

pub fn stability_check(inp: StabilityInputs) -> StabilityReport {
    let mut flags = Vec::new();
    let mut violation = false;
    let fitted_c = if inp.epsilon > inp.tol {
        Some(inp.dist_slice / inp.epsilon.powf(stability_exponent(inp.n)))
    } else {
        if inp.dist_slice > inp.tol.sqrt() {
            flags.push(format!("inconsistent: deficit {:e} vanishes but slice distance is {:e}", inp.epsilon, inp.dist_slice));
            violation = true;
        } else {
            flags.push("equality case: deficit and distance vanish".into());
        }
        None
    };
    if let (Some(c), Some(b)) = (fitted_c, inp.bound) {
        if c > b {
            flags.push(format!("fitted constant {c:e} exceeds bound {b:e}"));
            violation = true;
        }
    }
    let norm_ratio = (inp.aring_lp > inp.tol).then(|| inp.f_norm / inp.aring_lp);
    StabilityReport {
        epsilon: inp.epsilon,
        aring_lp: inp.aring_lp,
        dist_slice: inp.dist_slice,
        f_norm: inp.f_norm,
        fitted_c,
        exponent_observed: None,
        norm_ratio,
        flags,
        violation,
    }
}

/// Full pipeline for one surface: Euclidean image, fit, norms and distance.
#[derive(Debug, Clone)]
pub struct RigidityAnalysis {
    pub image: EuclideanImage,
    pub fit: RadialFit,
    pub norms: GraphNorms,
    pub aring_lp: f64,
    pub slice: (f64, f64),
}

pub fn analyze(surface: &GraphSurface, fields: &GeometryFields, normalize: bool) -> Result<RigidityAnalysis> {
    let grid = surface.grid();
    let p = grid.dim() as f64 + 1.0;
    let mut image = to_euclidean(surface)?;
    if normalize {
        image.normalize_volume();
    }
    let fit = fit_radial_graph(&image)?;
    let norms = graph_norms(grid, &fit.f, p)?;
    Ok(RigidityAnalysis { aring_lp: traceless_norm(grid, fields, p), slice: slice_distance(surface), image, fit, norms })
}

/// Least-squares slope and intercept of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Fit("need at least two positive points for a slope".into()));
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
