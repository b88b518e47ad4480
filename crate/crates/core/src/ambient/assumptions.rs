use serde::{Deserialize, Serialize};

use super::{Model, StaticModel, WarpedSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub pass: bool,
    /// Worst sampled margin; non-negative when the condition holds (up to the stated tolerance).
    pub margin: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub conditions: Vec<Condition>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Condition> {
        self.conditions.iter().filter(|c| !c.pass).collect()
    }

    fn push(&mut self, name: &str, margin: f64, tol: f64) {
        self.conditions.push(Condition { name: name.to_string(), pass: margin.is_finite() && margin >= -tol, margin });
    }
}

/// Samples the working range of `space` at `samples` points (≥ 100) and reports every
/// applicable condition. Static models additionally get H1–H5 on (s0, s_max].
pub fn check_assumptions(space: &WarpedSpace, samples: usize) -> Result<AssumptionReport> {
    if samples < 100 {
        return Err(Error::Config(format!("assumption sampling needs ≥ 100 points (got {samples})")));
    }
    let (lo, hi) = space.working_range();
    let rs: Vec<f64> = (0..samples).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / samples as f64).collect();
    let ws = rs.iter().map(|&r| space.eval(r)).collect::<Result<Vec<_>>>()?;
    let mut rep = AssumptionReport::default();

    let min_lambda = ws.iter().map(|w| w.lambda).fold(f64::INFINITY, f64::min);
    rep.push("lambda_positive", min_lambda, 0.0);
    let min_dl = ws.iter().map(|w| w.dlambda).fold(f64::INFINITY, f64::min);
    rep.push("lambda_prime_positive", min_dl, 0.0);

    // λ″ > 0 everywhere, or λ″ ≤ 0 with λ″/λ non-increasing
    let min_d2 = ws.iter().map(|w| w.d2lambda).fold(f64::INFINITY, f64::min);
    let scale = ws.iter().map(|w| (w.d2lambda / w.lambda).abs()).fold(1.0, f64::max);
    let convexity = if min_d2 > 0.0 {
        min_d2
    } else {
        let max_d2 = ws.iter().map(|w| w.d2lambda).fold(f64::NEG_INFINITY, f64::max);
        let max_slope = ws
            .windows(2)
            .zip(rs.windows(2))
            .map(|(w, r)| (w[1].d2lambda / w[1].lambda - w[0].d2lambda / w[0].lambda) / (r[1] - r[0]))
            .fold(f64::NEG_INFINITY, f64::max);
        (-max_d2).min(-max_slope)
    };
    rep.push("convexity_condition", convexity, 1e-12 * scale);
    rep.push("lambda_convex", min_d2, 0.0);

    let sup = ws.iter().map(|w| w.dlambda * w.dlambda - w.lambda * w.d2lambda).fold(f64::NEG_INFINITY, f64::max);
    let size = ws.iter().map(|w| w.dlambda * w.dlambda).fold(1.0, f64::max);
    rep.push("ricci_bound", 1.0 - sup, 1e-12 * size);

    let ab = match space.model() {
        Model::AlphaBeta { alpha, beta } => Some((*alpha, *beta)),
        Model::Hyperbolic => Some((1.0, 0.0)),
        _ => None,
    };
    if let Some((alpha, beta)) = ab {
        let ordered = if alpha >= beta && beta >= 0.0 && (alpha > beta || beta > 0.0) { 1.0 } else { -1.0 };
        rep.push("alphabeta_order", ordered, 0.0);
        rep.push("alphabeta_bound", 1.0 - (alpha * alpha - beta * beta), 0.0);
    }

    if let Some(sm) = space.static_model() {
        static_conditions(sm, samples, &mut rep);
    }
    Ok(rep)
}

fn static_conditions(sm: &StaticModel, samples: usize, rep: &mut AssumptionReport) {
    let n = sm.dim as f64;
    let (s0, smax) = (sm.s0, sm.s_max);
    let ss: Vec<f64> = (1..=samples).map(|i| s0 + (smax - s0) * i as f64 / samples as f64).collect();

    let (f2_0, _, _) = sm.f2_derivs(s0);
    let min_f = ss.iter().map(|&s| sm.f(s).0).fold(f64::INFINITY, f64::min);
    let h1 = if f2_0.abs() < 1e-12 { min_f } else { -f2_0.abs() };
    rep.push("H1", h1, 0.0);

    // remainder of 1 + κ²s² − f² − c s^{2−n}, measured in units of s^{4−2n}, must settle
    let k2 = sm.kappa * sm.kappa;
    let c = sm.mass_coefficient();
    let tail: Vec<f64> = ss[ss.len() * 9 / 10..]
        .iter()
        .map(|&s| {
            let (big, _, _) = sm.f2_derivs(s);
            (1.0 + k2 * s * s - big - c * s.powf(2.0 - n)) / s.powf(4.0 - 2.0 * n)
        })
        .collect();
    let spread = tail.iter().fold(f64::NEG_INFINITY, |a: f64, &b| a.max(b)) - tail.iter().fold(f64::INFINITY, |a: f64, &b| a.min(b));
    let level = tail.iter().map(|v| v.abs()).fold(1.0, f64::max);
    rep.push("H2", -spread, 1e-6 * level);

    let min_fp = ss.iter().map(|&s| sm.f(s).1).fold(f64::INFINITY, f64::min);
    rep.push("H3", min_fp, 0.0);

    // f(f′² + f f″) = f F″/2
    let mut h4 = f64::INFINITY;
    let mut h4_scale: f64 = 1.0;
    for &s in &ss {
        let (big, _, d2) = sm.f2_derivs(s);
        let f = big.sqrt();
        let terms = [f * 0.5 * d2, (n - 3.0) * big * f / s, (n - 2.0) * (1.0 - big) * f / (s * s)];
        h4 = h4.min(terms.iter().sum());
        h4_scale = h4_scale.max(terms.iter().map(|t| t.abs()).fold(0.0, f64::max));
    }
    rep.push("H4", h4, 1e-10 * h4_scale);

    let p = |x: f64| {
        let s = x.powf(1.0 / (n - 1.0));
        let (_, d1, _) = sm.f2_derivs(s);
        (d1 - 2.0 * k2 * s) * x
    };
    let (x0, x1) = (s0.powf(n - 1.0), smax.powf(n - 1.0));
    let h = (x1 - x0) / samples as f64;
    let ps: Vec<f64> = (1..=samples).map(|i| p(x0 + h * i as f64)).collect();
    let p_scale = ps.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let min_slope = ps.windows(2).map(|w| (w[1] - w[0]) / h).fold(f64::INFINITY, f64::min);
    let max_curv = ps.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]) / (h * h)).fold(f64::NEG_INFINITY, f64::max);
    rep.push("H5_nondecreasing", min_slope, 1e-9 * p_scale / h);
    rep.push("H5_concave", -max_curv, 1e-9 * p_scale / (h * h));

    if sm.kind == super::StaticKind::RnAds {
        rep.push("charge_below_mass", sm.mass - sm.charge, 0.0);
    }
}

/// sup over s ∈ [1.5 s0, 10 s0] of the static-equation trace residual
/// (|Δ̄f − dim·f| for AdS-Schwarzschild).
pub fn check_static_identity(sm: &StaticModel, samples: usize) -> f64 {
    let (lo, hi) = (1.5 * sm.s0, 10.0 * sm.s0);
    (0..samples)
        .map(|i| {
            let s = lo + (hi - lo) * i as f64 / (samples - 1).max(1) as f64;
            match sm.kind {
                super::StaticKind::AdsSchwarzschild => (sm.laplacian_f(s) - sm.dim as f64 * sm.f(s).0).abs(),
                super::StaticKind::RnAds => sm.trace_residual(s).abs(),
            }
        })
        .fold(0.0, f64::max)
}
