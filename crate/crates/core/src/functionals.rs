//! Global functionals of graphs and the Minkowski-type deficits.
//!
//! Slice curves are evaluated parametrically: every quantity of the slice S_r has a
//! closed form in λ(r), λ′(r) and the radial primitives of the space, so φ, ψ and their
//! inverses reduce to one-dimensional root finding in r.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ambient::{AssumptionReport, Model, WarpedSpace, check_assumptions};
use crate::error::{Error, Result};
use crate::hypersurface::{GeometryFields, GraphSurface, geometry_intrinsic};
use crate::numerics::brent;
use crate::spheregrid::{SphereGrid, sphere_area};

/// Slack below zero tolerated before a deficit counts as a violated inequality.
pub const DEFICIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Theorem {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [Theorem::T1, Theorem::T2, Theorem::T3, Theorem::T4, Theorem::T5];

    pub fn is_static(self) -> bool {
        matches!(self, Theorem::T4 | Theorem::T5)
    }

    /// Conditions of the assumption report the theorem relies on.
    fn conditions(self) -> &'static [&'static str] {
        match self {
            Theorem::T1 => &["lambda_positive", "lambda_prime_positive", "convexity_condition", "ricci_bound"],
            Theorem::T2 => {
                &["lambda_positive", "lambda_prime_positive", "convexity_condition", "ricci_bound", "lambda_convex"]
            }
            Theorem::T3 => &["lambda_positive", "lambda_prime_positive", "alphabeta_order", "alphabeta_bound"],
            Theorem::T4 | Theorem::T5 => &["H1", "H2", "H3", "H4", "H5_nondecreasing", "H5_concave"],
        }
    }

    /// Whether the theorem applies to this model at all.
    pub fn supports(self, model: &Model) -> bool {
        match self {
            Theorem::T1 | Theorem::T2 => !matches!(model, Model::AdsSchwarzschild { .. } | Model::RnAds { .. }),
            Theorem::T3 => matches!(model, Model::AlphaBeta { .. } | Model::Hyperbolic),
            Theorem::T4 => matches!(model, Model::RnAds { .. } | Model::AdsSchwarzschild { .. }),
            Theorem::T5 => matches!(model, Model::AdsSchwarzschild { .. }),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(Theorem::T1),
            "T2" => Ok(Theorem::T2),
            "T3" => Ok(Theorem::T3),
            "T4" => Ok(Theorem::T4),
            "T5" => Ok(Theorem::T5),
            other => Err(Error::Config(format!("unknown theorem {other:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Surface integrals

/// |Σ| = ∫ dμ.
pub fn area(surface: &GraphSurface) -> Result<f64> {
    let f = geometry_intrinsic(surface)?;
    Ok(f.area(surface.grid()))
}

/// |Σ̂| = ∫_𝕊ⁿ ∫_{inner end}^{r(y)} λⁿ dr dσ.
pub fn enclosed_volume(surface: &GraphSurface) -> Result<f64> {
    radial_integral(surface, |sp, r| sp.volume_below(r))
}

/// ∫_Σ̂ Ric(∂_r, ∂_r) dvol.
pub fn ricci_volume(surface: &GraphSurface) -> Result<f64> {
    radial_integral(surface, |sp, r| sp.ricci_volume_below(r))
}

/// ∫_Ω f dvol between the horizon and Σ (static models only).
pub fn weighted_volume(surface: &GraphSurface) -> Result<f64> {
    radial_integral(surface, |sp, r| sp.weighted_volume_below(r))
}

fn radial_integral<F: Fn(&WarpedSpace, f64) -> Result<f64>>(surface: &GraphSurface, g: F) -> Result<f64> {
    let space = surface.space();
    let vals = surface.r().iter().map(|&r| g(space, r)).collect::<Result<Vec<_>>>()?;
    surface.grid().integrate(&vals)
}

/// ‖Å‖_{L^p(Σ)}.
pub fn aring_lp(grid: &SphereGrid, fields: &GeometryFields, p: f64) -> f64 {
    fields.integrate(grid, |i| fields.aring2[i].max(0.0).powf(0.5 * p)).max(0.0).powf(1.0 / p)
}

/// ∫ λ′/H₁ dμ − ∫ u dμ.
pub fn heintze_karcher_gap(surface: &GraphSurface, fields: &GeometryFields) -> Result<f64> {
    if let Some((i, h)) = fields.h1.iter().enumerate().find(|(_, h)| !(**h > 0.0)) {
        return Err(Error::Hypothesis { what: format!("H₁ = {h:e} at node {i}; Heintze–Karcher needs H₁ > 0"), margin: *h });
    }
    Ok(fields.integrate(surface.grid(), |i| fields.warp[i].dlambda / fields.h1[i] - fields.u[i]))
}

// ---------------------------------------------------------------------------
// Slice curves

/// Closed-form slice quantities over a radial range, with a sampled table for
/// inspection and monotonicity checks.
#[derive(Debug, Clone, Serialize)]
pub struct SliceTable {
    pub r_samples: Vec<f64>,
    /// |S_r|
    pub area: Vec<f64>,
    /// |Ŝ_r|
    pub volume: Vec<f64>,
    /// ∫H₁ + (1/n)∫_Ŝ Ric(∂_r, ∂_r)
    pub b1: Vec<f64>,
    /// ∫H₁ − |Ŝ_r|
    pub w2: Vec<f64>,
    #[serde(skip)]
    space: Option<Arc<WarpedSpace>>,
    range: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceColumn {
    Area,
    Volume,
    B1,
    W2,
}

pub const MIN_SLICE_SAMPLES: usize = 64;

impl SliceTable {
    pub fn build(space: Arc<WarpedSpace>, r_range: Option<(f64, f64)>, samples: usize) -> Result<Self> {
        if samples < MIN_SLICE_SAMPLES {
            return Err(Error::Config(format!("slice table needs ≥ {MIN_SLICE_SAMPLES} samples (got {samples})")));
        }
        let (wlo, whi) = space.working_range();
        let (lo, hi) = r_range.unwrap_or((wlo, whi));
        if !(lo >= wlo && hi <= whi && lo < hi) {
            return Err(Error::Domain(format!("slice range [{lo}, {hi}] not inside [{wlo}, {whi}]")));
        }
        let mut t = SliceTable {
            r_samples: (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect(),
            area: Vec::new(),
            volume: Vec::new(),
            b1: Vec::new(),
            w2: Vec::new(),
            space: Some(space),
            range: (lo, hi),
        };
        for k in 0..samples {
            let r = t.r_samples[k];
            t.area.push(t.slice_area(r)?);
            t.volume.push(t.slice_volume(r)?);
            t.b1.push(t.slice_b1(r)?);
            t.w2.push(t.slice_w2(r)?);
        }
        for (name, col) in [("area", &t.area), ("volume", &t.volume), ("B1", &t.b1), ("W2", &t.w2)] {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite slice {name}")));
            }
        }
        for (name, col) in [("area", &t.area), ("B1", &t.b1)] {
            if let Some(k) = col.windows(2).position(|w| !(w[1] > w[0])) {
                return Err(Error::Numeric(format!("slice {name} not strictly increasing near r = {}", t.r_samples[k])));
            }
        }
        Ok(t)
    }

    fn space(&self) -> &WarpedSpace {
        self.space.as_deref().expect("slice table without space")
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    fn fiber_area(&self) -> f64 {
        sphere_area(self.space().n())
    }

    pub fn slice_area(&self, r: f64) -> Result<f64> {
        let w = self.space().eval(r)?;
        Ok(self.fiber_area() * w.lambda.powi(self.space().n() as i32))
    }

    pub fn slice_volume(&self, r: f64) -> Result<f64> {
        Ok(self.fiber_area() * self.space().volume_below(r)?)
    }

    pub fn slice_int_h1(&self, r: f64) -> Result<f64> {
        let n = self.space().n() as i32;
        let w = self.space().eval(r)?;
        Ok(self.fiber_area() * w.dlambda * w.lambda.powi(n - 1))
    }

    pub fn slice_b1(&self, r: f64) -> Result<f64> {
        let n = self.space().n() as f64;
        Ok(self.slice_int_h1(r)? + self.fiber_area() * self.space().ricci_volume_below(r)? / n)
    }

    pub fn slice_w2(&self, r: f64) -> Result<f64> {
        Ok(self.slice_int_h1(r)? - self.slice_volume(r)?)
    }

    pub fn column(&self, c: SliceColumn, r: f64) -> Result<f64> {
        match c {
            SliceColumn::Area => self.slice_area(r),
            SliceColumn::Volume => self.slice_volume(r),
            SliceColumn::B1 => self.slice_b1(r),
            SliceColumn::W2 => self.slice_w2(r),
        }
    }

    /// The slice radius at which column `c` equals `value`.
    pub fn radius_for(&self, c: SliceColumn, value: f64) -> Result<f64> {
        let (lo, hi) = self.range;
        let (f_lo, f_hi) = (self.column(c, lo)?, self.column(c, hi)?);
        let span = (f_hi - f_lo).abs();
        let slack = 1e-14 * span.max(value.abs());
        if value < f_lo.min(f_hi) - slack || value > f_lo.max(f_hi) + slack {
            return Err(Error::Extrapolation(format!(
                "{c:?} = {value} outside slice range [{}, {}] (r ∈ [{lo}, {hi}])",
                f_lo.min(f_hi),
                f_lo.max(f_hi)
            )));
        }
        if (value - f_lo).abs() <= slack {
            return Ok(lo);
        }
        if (value - f_hi).abs() <= slack {
            return Ok(hi);
        }
        brent(|r| self.column(c, r).map(|v| v - value).unwrap_or(f64::NAN), lo, hi, 1e-15 * (hi - lo).max(1.0))
    }

    /// φ for Theorem 1: slice area ↦ B1.
    pub fn phi(&self, area: f64) -> Result<f64> {
        self.slice_b1(self.radius_for(SliceColumn::Area, area)?)
    }

    pub fn phi_inverse(&self, b1: f64) -> Result<f64> {
        self.slice_area(self.radius_for(SliceColumn::B1, b1)?)
    }

    /// ψ: slice volume ↦ B1.
    pub fn psi(&self, volume: f64) -> Result<f64> {
        self.slice_b1(self.radius_for(SliceColumn::Volume, volume)?)
    }

    pub fn psi_inverse(&self, b1: f64) -> Result<f64> {
        self.slice_volume(self.radius_for(SliceColumn::B1, b1)?)
    }

    /// φ for Theorem 3: slice area ↦ W2.
    pub fn phi_w2(&self, area: f64) -> Result<f64> {
        self.slice_w2(self.radius_for(SliceColumn::Area, area)?)
    }

    /// dW2/dA along slices, from dW2/dr and dA/dr in closed form.
    pub fn phi_w2_prime(&self, area: f64) -> Result<f64> {
        let r = self.radius_for(SliceColumn::Area, area)?;
        let sp = self.space();
        let n = sp.n() as i32;
        let nf = n as f64;
        let w = sp.eval(r)?;
        let (l, dl, d2l) = (w.lambda, w.dlambda, w.d2lambda);
        let dw2 = d2l * l.powi(n - 1) + (nf - 1.0) * dl * dl * l.powi(n - 2) - l.powi(n);
        let da = nf * l.powi(n - 1) * dl;
        Ok(dw2 / da)
    }

    /// Residuals of φ′(|S_r|)|S_r| = ((n−1)/n)(W₂(S_r) + |Ŝ_r|) + extra·|Ŝ_r| at the
    /// midpoints of the sample grid, relative to max(1, |lhs|). `extra = 0` is the identity
    /// that holds for λ″ = λ; `extra = 1` carries the additional |Ŝ_r| term.
    pub fn phi_prime_residuals(&self, extra: f64) -> Result<Vec<f64>> {
        let nf = self.space().n() as f64;
        self.r_samples
            .windows(2)
            .map(|w| {
                let r = 0.5 * (w[0] + w[1]);
                let a = self.slice_area(r)?;
                let lhs = self.phi_w2_prime(a)? * a;
                let vol = self.slice_volume(r)?;
                let rhs = (nf - 1.0) / nf * (self.slice_w2(r)? + vol) + extra * vol;
                Ok((lhs - rhs).abs() / lhs.abs().max(1.0))
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Deficits

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub theorem: Theorem,
    pub epsilon: f64,
    pub components: BTreeMap<String, f64>,
    /// ‖Å‖_{L^{n+1}}
    pub aring_lp: f64,
    pub notes: Vec<String>,
}

/// Evaluates one theorem's deficit for surfaces in a fixed space.
#[derive(Debug, Clone)]
pub struct DeficitEvaluator {
    theorem: Theorem,
    space: Arc<WarpedSpace>,
    table: SliceTable,
    assumptions: AssumptionReport,
}

impl DeficitEvaluator {
    pub fn new(space: Arc<WarpedSpace>, theorem: Theorem) -> Result<Self> {
        if !theorem.supports(space.model()) {
            return Err(Error::Config(format!("{theorem} does not apply to {:?}", space.model())));
        }
        let assumptions = check_assumptions(&space, 1000)?;
        let table = SliceTable::build(space.clone(), None, 128)?;
        Ok(Self { theorem, space, table, assumptions })
    }

    pub fn theorem(&self) -> Theorem {
        self.theorem
    }

    pub fn space(&self) -> &Arc<WarpedSpace> {
        &self.space
    }

    pub fn table(&self) -> &SliceTable {
        &self.table
    }

    pub fn assumptions(&self) -> &AssumptionReport {
        &self.assumptions
    }

    /// Checks the space and surface hypotheses of the theorem.
    pub fn check_hypotheses(&self, fields: &GeometryFields) -> Result<()> {
        let optional = self.assumptions.get("charge_below_mass").map(|_| "charge_below_mass");
        for name in self.theorem.conditions().iter().copied().chain(optional) {
            match self.assumptions.get(name) {
                Some(c) if !c.pass => {
                    return Err(Error::Hypothesis { what: format!("{}: space condition {name} fails", self.theorem), margin: c.margin });
                }
                None => {
                    return Err(Error::Hypothesis { what: format!("{}: condition {name} not available", self.theorem), margin: f64::NAN });
                }
                _ => {}
            }
        }
        if self.theorem.is_static() {
            let h = fields.mean.iter().copied().fold(f64::INFINITY, f64::min);
            if !(h > 0.0) {
                return Err(Error::Hypothesis { what: format!("{}: surface not mean convex", self.theorem), margin: h });
            }
        } else {
            let k = fields.min_kappa();
            if !(k > 0.0) {
                return Err(Error::Hypothesis { what: format!("{}: surface not strictly convex", self.theorem), margin: k });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, surface: &GraphSurface, fields: &GeometryFields) -> Result<DeficitReport> {
        self.check_hypotheses(fields)?;
        self.evaluate_unchecked(surface, fields)
    }

    /// The deficit without hypothesis checks (monitors along flows).
    pub fn evaluate_unchecked(&self, surface: &GraphSurface, fields: &GeometryFields) -> Result<DeficitReport> {
        let grid = surface.grid();
        let n = self.space.n() as f64;
        let mut c = BTreeMap::new();
        let mut notes = Vec::new();
        let area = fields.area(grid);
        c.insert("area".to_string(), area);
        let epsilon = match self.theorem {
            Theorem::T1 | Theorem::T2 => {
                let int_h1 = fields.integrate(grid, |i| fields.h1[i]);
                let ric = ricci_volume(surface)?;
                let b1 = int_h1 + ric / n;
                c.insert("int_H1".into(), int_h1);
                c.insert("int_ricci".into(), ric);
                c.insert("B1".into(), b1);
                if self.theorem == Theorem::T1 {
                    let target = self.table.phi_inverse(b1)?;
                    c.insert("phi_inverse".into(), target);
                    target - area
                } else {
                    let vol = enclosed_volume(surface)?;
                    let target = self.table.psi_inverse(b1)?;
                    c.insert("volume".into(), vol);
                    c.insert("psi_inverse".into(), target);
                    match heintze_karcher_gap(surface, fields) {
                        Ok(g) => {
                            c.insert("heintze_karcher_gap".into(), g);
                        }
                        Err(e) => notes.push(e.to_string()),
                    }
                    target - vol
                }
            }
            Theorem::T3 => {
                let int_h1 = fields.integrate(grid, |i| fields.h1[i]);
                let vol = enclosed_volume(surface)?;
                let phi = self.table.phi_w2(area)?;
                c.insert("int_H1".into(), int_h1);
                c.insert("volume".into(), vol);
                c.insert("phi".into(), phi);
                int_h1 - vol - phi
            }
            Theorem::T4 | Theorem::T5 => {
                let w = brendle_terms(surface, fields, area)?;
                c.extend(w.components);
                w.value
            }
        };
        if !epsilon.is_finite() {
            return Err(Error::Numeric(format!("{} deficit not finite", self.theorem)));
        }
        Ok(DeficitReport { theorem: self.theorem, epsilon, components: c, aring_lp: aring_lp(grid, fields, n + 1.0), notes })
    }
}

/// Convenience: build the evaluator, compute geometry, and evaluate with hypothesis checks.
pub fn deficit(surface: &GraphSurface, theorem: Theorem) -> Result<DeficitReport> {
    let ev = DeficitEvaluator::new(surface.space().clone(), theorem)?;
    let fields = geometry_intrinsic(surface)?;
    ev.evaluate(surface, &fields)
}

struct Terms {
    value: f64,
    components: BTreeMap<String, f64>,
}

/// W = ∫fH − d(d−1)κ²∫_Ω f − (d−1)f(s̄)²s̄^{d−2}|𝕊^{d−1}| + (d−1)κ²(s̄^d − s0^d)|𝕊^{d−1}|
/// with d the dimension of the static form (fiber 𝕊^{d−1}) and s̄ the areal radius.
fn brendle_terms(surface: &GraphSurface, fields: &GeometryFields, area: f64) -> Result<Terms> {
    let space = surface.space();
    let sm = space
        .static_model()
        .ok_or_else(|| Error::Config("static deficit requires a static model".into()))?;
    let grid = surface.grid();
    let d = sm.dim as f64;
    let k2 = sm.kappa * sm.kappa;
    let fiber = sphere_area(space.n());
    let int_fh = fields.integrate(grid, |i| fields.warp[i].dlambda * fields.mean[i]);
    let wvol = weighted_volume(surface)?;
    let sbar = (area / fiber).powf(1.0 / (d - 1.0));
    let (f2, _, _) = sm.f2_derivs(sbar);
    let value = int_fh - d * (d - 1.0) * k2 * wvol - (d - 1.0) * f2 * sbar.powf(d - 2.0) * fiber
        + (d - 1.0) * k2 * (sbar.powf(d) - sm.s0.powf(d)) * fiber;
    let mut components = BTreeMap::new();
    components.insert("int_fH".to_string(), int_fh);
    components.insert("weighted_volume".to_string(), wvol);
    components.insert("areal_radius".to_string(), sbar);
    Ok(Terms { value, components })
}

/// W(t) and the two normalizations Q = |Σ₀|^{−p}W and |Σ_t|^{−p}W, p = (d−2)/(d−1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrendleQ {
    pub w: f64,
    pub q_initial: f64,
    pub q_current: f64,
    pub area: f64,
}

pub fn brendle_w_q(surface: &GraphSurface, fields: &GeometryFields, sigma0_area: f64) -> Result<BrendleQ> {
    let sm = surface
        .space()
        .static_model()
        .ok_or_else(|| Error::Config("W(t) requires a static model".into()))?;
    let h = fields.mean.iter().copied().fold(f64::INFINITY, f64::min);
    if !(h > 0.0) {
        return Err(Error::Hypothesis { what: "W(t): surface not mean convex".into(), margin: h });
    }
    let d = sm.dim as f64;
    let p = (d - 2.0) / (d - 1.0);
    let area = fields.area(surface.grid());
    let w = brendle_terms(surface, fields, area)?.value;
    Ok(BrendleQ { w, q_initial: sigma0_area.powf(-p) * w, q_current: area.powf(-p) * w, area })
}
