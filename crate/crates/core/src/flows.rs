//! Normal flows of radial graphs: the locally constrained flow (speed λ′H₁/H₂ − u) and
//! inverse mean curvature flow (speed 1/H).
//!
//! A normal speed F moves the graph function by ∂_t r = F·v. Time stepping is classical
//! RK4 with an explicit stability bound: linearizing F in the curvatures, the leading
//! part of the right-hand side is D·Δr with D = max|∂F/∂κ_i|/λ², so steps are limited to
//! dt ≤ cfl·2.78/(D·L) where L bounds the spectrum of the discrete Laplacian.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ambient::WarpedSpace;
use crate::error::{Error, Result};
use crate::functionals::{BrendleQ, DeficitEvaluator, brendle_w_q, enclosed_volume, ricci_volume};
use crate::hypersurface::{GeometryFields, GraphSurface, geometry_intrinsic};
use crate::numerics::gauss_legendre_fixed;
use crate::spheregrid::SphereGrid;

/// Threshold below which H (IMCF) or H₂ (constrained flow) trips the parabolicity guard.
pub const EPS_GUARD: f64 = 1e-8;
/// Negative-real-axis extent of the RK4 stability region (≈ 2.785).
const RK4_REACH: f64 = 2.78;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Constrained,
    Imcf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowControls {
    pub flow_kind: FlowKind,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub cfl: f64,
    pub t_max: f64,
    pub tol_umbilic: f64,
    /// Stop once sup|Å| < tol_umbilic. On by default for the constrained flow only:
    /// IMCF keeps expanding umbilic slices.
    pub stop_umbilic: bool,
    pub monitor_every: usize,
    pub max_steps: usize,
}

impl FlowControls {
    pub fn new(flow_kind: FlowKind, t_max: f64) -> Self {
        Self {
            flow_kind,
            dt_init: 1e-3,
            dt_min: 1e-9,
            dt_max: 5e-2,
            cfl: 0.5,
            t_max,
            tol_umbilic: 1e-6,
            stop_umbilic: flow_kind == FlowKind::Constrained,
            monitor_every: 10,
            max_steps: 2_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dt_min > 0.0
            && self.dt_min <= self.dt_init
            && self.dt_init <= self.dt_max
            && self.cfl > 0.0
            && self.cfl <= 1.0
            && self.tol_umbilic > 0.0
            && self.t_max > 0.0
            && self.monitor_every > 0;
        if ok { Ok(()) } else { Err(Error::Config(format!("invalid flow controls {self:?}"))) }
    }
}

// ---------------------------------------------------------------------------
// Speeds

/// λ′H₁/H₂ − u per node.
pub fn speed_constrained(fields: &GeometryFields) -> Result<Vec<f64>> {
    if let Some((i, h2)) = fields.h2.iter().enumerate().find(|(_, h)| !(**h > EPS_GUARD)) {
        return Err(Error::Guard(format!("parabolicity: H₂ = {h2:e} at node {i}")));
    }
    Ok((0..fields.len()).map(|i| fields.warp[i].dlambda * fields.h1[i] / fields.h2[i] - fields.u[i]).collect())
}

/// 1/H per node.
pub fn speed_imcf(fields: &GeometryFields) -> Result<Vec<f64>> {
    if let Some((i, h)) = fields.mean.iter().enumerate().find(|(_, h)| !(**h > EPS_GUARD)) {
        return Err(Error::Guard(format!("mean convexity: H = {h:e} at node {i}")));
    }
    Ok(fields.mean.iter().map(|h| 1.0 / h).collect())
}

pub fn speed(kind: FlowKind, fields: &GeometryFields) -> Result<Vec<f64>> {
    match kind {
        FlowKind::Constrained => speed_constrained(fields),
        FlowKind::Imcf => speed_imcf(fields),
    }
}

/// max over nodes of |∂F/∂κ_i|/λ², the diffusion coefficient of the linearized flow.
fn diffusion(kind: FlowKind, fields: &GeometryFields) -> f64 {
    let n = fields.n as f64;
    let pairs = 0.5 * n * (n - 1.0);
    (0..fields.len())
        .map(|i| {
            let l2 = fields.warp[i].lambda.powi(2);
            let d = match kind {
                FlowKind::Imcf => 1.0 / fields.mean[i].powi(2),
                FlowKind::Constrained => {
                    let (h1, h2) = (fields.h1[i], fields.h2[i]);
                    let sigma1 = fields.mean[i];
                    let k = fields.kappa[i];
                    k.values
                        .iter()
                        .zip(k.mult)
                        .filter(|(_, m)| *m > 0)
                        .map(|(&ki, _)| {
                            let d_sigma2 = sigma1 - ki;
                            (fields.warp[i].dlambda * (1.0 / (n * h2) - h1 * d_sigma2 / (pairs * h2 * h2))).abs()
                        })
                        .fold(0.0, f64::max)
                }
            };
            d / l2
        })
        .fold(0.0, f64::max)
}

/// Spectral radius of the discrete Laplacian by power iteration.
pub fn laplacian_bound(grid: &SphereGrid) -> Result<f64> {
    let len = grid.len();
    // deterministic start vector with all modes present
    let mut x: Vec<f64> = (0..len).map(|i| (i as f64 * 0.754_877_666).fract() - 0.5).collect();
    let mut est = 0.0;
    for _ in 0..60 {
        let y = grid.laplace(&x)?;
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || xn == 0.0 {
            break;
        }
        est = norm / xn;
        x = y.iter().map(|v| v / norm).collect();
    }
    Ok(est.max(1.0) * 1.05)
}

// ---------------------------------------------------------------------------
// Stepping

/// Right-hand side ∂_t r = F·v and the speed field.
fn rhs(surface: &GraphSurface, kind: FlowKind) -> Result<(Vec<f64>, Vec<f64>, GeometryFields)> {
    let fields = geometry_intrinsic(surface)?;
    let sp = speed(kind, &fields)?;
    let dr = sp.iter().zip(&fields.v).map(|(s, v)| s * v).collect();
    Ok((dr, sp, fields))
}

fn stage(surface: &GraphSurface, base: &[f64], k: &[f64], h: f64) -> Result<GraphSurface> {
    let r: Vec<f64> = base.iter().zip(k).map(|(b, k)| b + h * k).collect();
    GraphSurface::unchecked(surface.grid().clone(), surface.space().clone(), r)
        .map_err(|e| Error::StepRejected(format!("stage left admissible set: {e}")))
}

/// Result of one accepted RK4 step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub surface: GraphSurface,
    /// Largest |F| over all stages.
    pub max_speed: f64,
    /// Per-node |F| averaged over the stages with RK4 weights.
    pub mean_abs_speed: Vec<f64>,
}

/// One RK4 step of ∂_t r = F·v. Stage failures (domain exit, guard at an intermediate
/// state, spectral blow-up) come back as `StepRejected`; a guard at the initial state is
/// reported as `Guard`.
pub fn step(surface: &GraphSurface, kind: FlowKind, dt: f64) -> Result<StepOutcome> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("dt = {dt}")));
    }
    let (k1, s1, _) = rhs(surface, kind)?;
    step_from(surface, kind, dt, k1, s1)
}

fn step_from(surface: &GraphSurface, kind: FlowKind, dt: f64, k1: Vec<f64>, s1: Vec<f64>) -> Result<StepOutcome> {
    let reject = |e: Error| match e {
        Error::StepRejected(_) => e,
        other => Error::StepRejected(other.to_string()),
    };
    let r0 = surface.r();
    let (k2, s2, _) = rhs(&stage(surface, r0, &k1, 0.5 * dt)?, kind).map_err(reject)?;
    let (k3, s3, _) = rhs(&stage(surface, r0, &k2, 0.5 * dt)?, kind).map_err(reject)?;
    let (k4, s4, _) = rhs(&stage(surface, r0, &k3, dt)?, kind).map_err(reject)?;
    let r: Vec<f64> =
        (0..r0.len()).map(|i| r0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    let next = GraphSurface::unchecked(surface.grid().clone(), surface.space().clone(), r).map_err(reject)?;

    let grid = surface.grid();
    let (tail0, _) = grid.spectral_tail(r0, crate::hypersurface::TAIL_FRACTION)?;
    let (tail1, _) = grid.spectral_tail(next.r(), crate::hypersurface::TAIL_FRACTION)?;
    let norm = next.r().iter().map(|v| v * v).sum::<f64>().sqrt();
    if tail1 > 2.0 * tail0 + 1e-12 * norm {
        return Err(Error::StepRejected(format!("spectral tail grew from {tail0:e} to {tail1:e}")));
    }
    next.check_smoothness(crate::hypersurface::DEFAULT_TAIL_LIMIT).map_err(reject)?;

    let max_speed = [&s1, &s2, &s3, &s4].iter().flat_map(|s| s.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let mean_abs_speed =
        (0..r0.len()).map(|i| (s1[i].abs() + 2.0 * s2[i].abs() + 2.0 * s3[i].abs() + s4[i].abs()) / 6.0).collect();
    Ok(StepOutcome { surface: next, max_speed, mean_abs_speed })
}

// ---------------------------------------------------------------------------
// Monitoring

/// Rate whose time integral is bounded by the drop of the flow's deficit:
/// constrained: ∫λ′|Å|²/((n−1)H₂); IMCF in a warped space: (1/n)∫|Å|²/H;
/// IMCF in a static model: (|Σ₀|/|Σ_t|)^{(d−2)/(d−1)} ∫ f|Å|²/H.
pub fn dissipation_rate(kind: FlowKind, space: &WarpedSpace, grid: &SphereGrid, fields: &GeometryFields, area0: f64) -> f64 {
    let n = fields.n as f64;
    match kind {
        FlowKind::Constrained => {
            fields.integrate(grid, |i| fields.warp[i].dlambda * fields.aring2[i] / ((n - 1.0) * fields.h2[i]))
        }
        FlowKind::Imcf => match space.static_model() {
            Some(sm) => {
                let d = sm.dim as f64;
                let p = (d - 2.0) / (d - 1.0);
                let area = fields.area(grid);
                (area0 / area).powf(p) * fields.integrate(grid, |i| fields.warp[i].dlambda * fields.aring2[i] / fields.mean[i])
            }
            None => fields.integrate(grid, |i| fields.aring2[i] / fields.mean[i]) / n,
        },
    }
}

/// Optional monitors evaluated at every snapshot.
#[derive(Debug, Clone, Default)]
pub struct Monitor {
    pub deficit: Option<DeficitEvaluator>,
    /// Record W(t) and Q(t) (static models).
    pub brendle: bool,
    /// Compute the Hausdorff-distance upper bound to Σ₀ at each snapshot.
    pub hausdorff: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub area: f64,
    pub volume: f64,
    pub int_h1: f64,
    /// ∫H₁ + (1/n)∫_Σ̂ Ric(∂_r, ∂_r)
    pub b1: f64,
    pub deficit: Option<f64>,
    /// Instantaneous dissipation rate (see `dissipation_rate`).
    pub dissipation: f64,
    /// ∫₀ᵗ of the dissipation rate (trapezoid over every step).
    pub cumulative_dissipation: f64,
    pub sup_aring: f64,
    pub convexity_margin: f64,
    pub min_mean: f64,
    /// max over [0, t] of |F|.
    pub max_speed: f64,
    /// max_ξ ∫₀ᵗ |F| dτ along node trajectories.
    pub path_length: f64,
    /// max_speed · t
    pub displacement_bound: f64,
    /// Upper bound on dist(Σ_t, Σ₀), when enabled.
    pub hausdorff: Option<f64>,
    pub brendle: Option<BrendleQ>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", content = "detail", rename_all = "snake_case")]
pub enum Termination {
    Umbilic,
    TMax,
    MaxSteps,
    GuardTripped(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowTrace {
    pub kind: FlowKind,
    pub snapshots: Vec<Snapshot>,
    pub termination: Termination,
    pub steps: usize,
    pub rejected: usize,
    #[serde(skip)]
    pub final_surface: Option<GraphSurface>,
}

impl FlowTrace {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trace has at least the initial snapshot")
    }
}

struct Running {
    max_speed: f64,
    path: Vec<f64>,
    cumulative: f64,
    area0: f64,
}

#[allow(clippy::too_many_arguments)]
fn snapshot(
    step: usize,
    t: f64,
    surface: &GraphSurface,
    fields: &GeometryFields,
    rate: f64,
    run: &Running,
    monitor: &Monitor,
    initial: &GraphSurface,
) -> Result<Snapshot> {
    let grid = surface.grid();
    let n = surface.space().n() as f64;
    let area = fields.area(grid);
    let int_h1 = fields.integrate(grid, |i| fields.h1[i]);
    let ric = ricci_volume(surface)?;
    let deficit = match &monitor.deficit {
        Some(ev) => Some(ev.evaluate_unchecked(surface, fields)?.epsilon),
        None => None,
    };
    let brendle = if monitor.brendle { Some(brendle_w_q(surface, fields, run.area0)?) } else { None };
    let hausdorff = if monitor.hausdorff { Some(hausdorff_upper(surface, initial)?) } else { None };
    Ok(Snapshot {
        step,
        t,
        area,
        volume: enclosed_volume(surface)?,
        int_h1,
        b1: int_h1 + ric / n,
        deficit,
        dissipation: rate,
        cumulative_dissipation: run.cumulative,
        sup_aring: fields.sup_aring(),
        convexity_margin: fields.min_kappa(),
        min_mean: fields.mean.iter().copied().fold(f64::INFINITY, f64::min),
        max_speed: run.max_speed,
        path_length: run.path.iter().copied().fold(0.0, f64::max),
        displacement_bound: run.max_speed * t,
        hausdorff,
        brendle,
    })
}

/// Integrates until Å falls below `tol_umbilic`, `t_max` is reached, or a guard trips.
/// Numeric trouble never panics: it ends the run with `GuardTripped`.
pub fn run(surface: &GraphSurface, controls: &FlowControls, monitor: &Monitor) -> Result<FlowTrace> {
    controls.validate()?;
    let kind = controls.flow_kind;
    let grid = surface.grid().clone();
    let space: Arc<WarpedSpace> = surface.space().clone();
    let lap = laplacian_bound(&grid)?;
    let initial = surface.clone();

    let mut cur = surface.clone();
    let mut fields = geometry_intrinsic(&cur)?;
    let area0 = fields.area(&grid);
    let mut rate = dissipation_rate(kind, &space, &grid, &fields, area0);
    let mut run = Running { max_speed: 0.0, path: vec![0.0; grid.len()], cumulative: 0.0, area0 };
    let mut t = 0.0;
    let mut dt = controls.dt_init;
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut snaps = vec![snapshot(0, 0.0, &cur, &fields, rate, &run, monitor, &initial)?];

    let termination = loop {
        if controls.stop_umbilic && fields.sup_aring() < controls.tol_umbilic {
            break Termination::Umbilic;
        }
        if t >= controls.t_max * (1.0 - 1e-14) {
            break Termination::TMax;
        }
        if steps >= controls.max_steps {
            break Termination::MaxSteps;
        }
        let sp = match speed(kind, &fields) {
            Ok(s) => s,
            Err(e) => break Termination::GuardTripped(e.to_string()),
        };
        let k1: Vec<f64> = sp.iter().zip(&fields.v).map(|(s, v)| s * v).collect();
        let stable = controls.cfl * RK4_REACH / (diffusion(kind, &fields) * lap);
        dt = dt.min(stable).clamp(controls.dt_min, controls.dt_max).min(controls.t_max - t);
        let outcome = loop {
            match step_from(&cur, kind, dt, k1.clone(), sp.clone()) {
                Ok(o) => break Ok(o),
                Err(Error::StepRejected(msg)) => {
                    rejected += 1;
                    dt *= 0.5;
                    if dt < controls.dt_min {
                        break Err(format!("dt below minimum after rejection: {msg}"));
                    }
                }
                Err(e) => break Err(e.to_string()),
            }
        };
        let o = match outcome {
            Ok(o) => o,
            Err(msg) => break Termination::GuardTripped(msg),
        };
        let next_fields = match geometry_intrinsic(&o.surface) {
            Ok(f) => f,
            Err(e) => break Termination::GuardTripped(e.to_string()),
        };
        let next_rate = dissipation_rate(kind, &space, &grid, &next_fields, area0);
        run.cumulative += 0.5 * dt * (rate + next_rate);
        run.max_speed = run.max_speed.max(o.max_speed);
        for (p, s) in run.path.iter_mut().zip(&o.mean_abs_speed) {
            *p += dt * s;
        }
        t += dt;
        steps += 1;
        cur = o.surface;
        fields = next_fields;
        rate = next_rate;
        // let dt recover after rejections
        dt = (dt * 1.25).min(controls.dt_max);
        if steps % controls.monitor_every == 0 {
            match snapshot(steps, t, &cur, &fields, rate, &run, monitor, &initial) {
                Ok(s) => snaps.push(s),
                Err(e) => break Termination::GuardTripped(e.to_string()),
            }
        }
    };
    if snaps.last().map(|s| s.step) != Some(steps) {
        snaps.push(snapshot(steps, t, &cur, &fields, rate, &run, monitor, &initial)?);
    }
    Ok(FlowTrace { kind, snapshots: snaps, termination, steps, rejected, final_surface: Some(cur) })
}

// ---------------------------------------------------------------------------
// Distances

/// Length of the coordinate-straight path (r, θ) from a to b at fixed φ; an upper bound on
/// the ambient distance.
fn meridian_path(space: &WarpedSpace, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dr, dth) = (b.0 - a.0, b.1 - a.1);
    if dth == 0.0 {
        return dr.abs();
    }
    gauss_legendre_fixed(
        |s| {
            let r = a.0 + s * dr;
            let l = space.eval(r).map(|w| w.lambda).unwrap_or(f64::NAN);
            (dr * dr + l * l * dth * dth).sqrt()
        },
        0.0,
        1.0,
    )
}

fn one_sided(space: &WarpedSpace, from: &GraphSurface, to: &GraphSurface) -> Result<f64> {
    let grid = from.grid();
    let interp = to.grid().interpolator(to.r());
    let lam_min = from
        .r()
        .iter()
        .chain(to.r())
        .map(|&r| space.eval(r).map(|w| w.lambda))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let (th, ph) = grid.node(i);
        let ra = from.r()[i];
        let radial = (interp.eval(th, ph) - ra).abs();
        // candidates farther than the radial distance are useless
        let w = (radial / lam_min).min(std::f64::consts::PI);
        let lo = (th - w).max(0.0);
        let hi = (th + w).min(std::f64::consts::PI);
        let f = |x: f64| meridian_path(space, (ra, th), (interp.eval(x, ph), x));
        let mut best = radial;
        if hi > lo {
            let m = 16;
            let mut k_best = 0;
            let mut v_best = f64::INFINITY;
            for k in 0..=m {
                let x = lo + (hi - lo) * k as f64 / m as f64;
                let v = f(x);
                if v < v_best {
                    v_best = v;
                    k_best = k;
                }
            }
            let h = (hi - lo) / m as f64;
            let (mut a, mut b) = ((lo + h * (k_best as f64 - 1.0)).max(lo), (lo + h * (k_best as f64 + 1.0)).min(hi));
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
            let (mut fc, mut fd) = (f(c), f(d));
            for _ in 0..60 {
                if fc < fd {
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
            best = best.min(v_best).min(fc).min(fd);
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Upper bound on the symmetric Hausdorff distance between two graphs in the same space:
/// for every node, the shortest coordinate-straight path to the other surface within the
/// node's meridian half-plane.
pub fn hausdorff_upper(a: &GraphSurface, b: &GraphSurface) -> Result<f64> {
    let space = a.space();
    Ok(one_sided(space, a, b)?.max(one_sided(space, b, a)?))
}
