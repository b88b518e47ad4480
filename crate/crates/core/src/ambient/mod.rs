//! Warped-product ambient spaces (a, b) × 𝕊ⁿ with ḡ = dr² + λ(r)² σ.

mod assumptions;
mod static_model;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Primitive, graded_knots};

pub use assumptions::{AssumptionReport, Condition, check_assumptions, check_static_identity};
pub use static_model::{DEFAULT_HORIZON_MARGIN, DEFAULT_OUTER_FACTOR, StaticKind, StaticModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Flat,
    Hyperbolic,
    AlphaBeta { alpha: f64, beta: f64 },
    /// `dim` is the ambient dimension of the static form; fiber dimension is `dim − 1`.
    AdsSchwarzschild { mass: f64, dim: usize },
    RnAds { mass: f64, charge: f64, kappa: f64, dim: usize },
    Custom { name: String },
}

/// λ, λ′, λ″ at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Warp {
    pub lambda: f64,
    pub dlambda: f64,
    pub d2lambda: f64,
}

/// Conformal flattening data: ḡ = e^{2ω}(dρ² + ρ²σ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flattening {
    pub rho: f64,
    pub omega: f64,
    /// dω/dr = (λ′ − 1)/λ.
    pub domega: f64,
}

pub type WarpFn = Arc<dyn Fn(f64) -> Warp + Send + Sync>;

#[derive(Clone)]
enum Profile {
    Flat,
    Hyperbolic,
    AlphaBeta(f64, f64),
    Static(Arc<StaticModel>),
    Custom(WarpFn),
}

impl Profile {
    fn warp(&self, r: f64) -> Result<Warp> {
        Ok(match self {
            Profile::Flat => Warp { lambda: r, dlambda: 1.0, d2lambda: 0.0 },
            Profile::Hyperbolic => {
                let (s, c) = (r.sinh(), r.cosh());
                Warp { lambda: s, dlambda: c, d2lambda: s }
            }
            Profile::AlphaBeta(a, b) => {
                let (s, c) = (r.sinh(), r.cosh());
                let l = a * s + b * c;
                Warp { lambda: l, dlambda: a * c + b * s, d2lambda: l }
            }
            Profile::Static(m) => {
                let s = m.s_of_r(r)?;
                let (f, fp, _) = m.f(s);
                Warp { lambda: s, dlambda: f, d2lambda: f * fp }
            }
            Profile::Custom(w) => w(r),
        })
    }
}

/// Knobs for building a space; `None` selects the model default.
#[derive(Debug, Clone, Default)]
pub struct SpaceOptions {
    pub domain: Option<(f64, f64)>,
    pub r_ref: Option<f64>,
    pub horizon_margin: Option<f64>,
    pub outer_factor: Option<f64>,
}

#[derive(Clone)]
pub struct WarpedSpace {
    model: Model,
    n: usize,
    a: f64,
    b: f64,
    lower_margin: f64,
    upper_margin: f64,
    r_ref: f64,
    profile: Profile,
    statics: Option<Arc<StaticModel>>,
    volume: Primitive,
    ricci_volume: Primitive,
    log_rho: Primitive,
    log_rho_ref: f64,
    weighted: Option<Primitive>,
}

impl fmt::Debug for WarpedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpedSpace")
            .field("model", &self.model)
            .field("n", &self.n)
            .field("domain", &(self.a, self.b))
            .field("r_ref", &self.r_ref)
            .finish()
    }
}

const PANELS: usize = 240;
const TOL: f64 = 1e-13;

impl WarpedSpace {
    pub fn flat(n: usize) -> Result<Self> {
        Self::from_model(&Model::Flat, n, &SpaceOptions::default())
    }

    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::from_model(&Model::Hyperbolic, n, &SpaceOptions::default())
    }

    pub fn alpha_beta(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::from_model(&Model::AlphaBeta { alpha, beta }, n, &SpaceOptions::default())
    }

    pub fn ads_schwarzschild(mass: f64, dim: usize) -> Result<Self> {
        Self::from_model(&Model::AdsSchwarzschild { mass, dim }, dim - 1, &SpaceOptions::default())
    }

    pub fn rn_ads(mass: f64, charge: f64, kappa: f64, dim: usize) -> Result<Self> {
        Self::from_model(&Model::RnAds { mass, charge, kappa, dim }, dim - 1, &SpaceOptions::default())
    }

    /// Builds a space from a model description. For the static models `n` must equal `dim − 1`.
    pub fn from_model(model: &Model, n: usize, opts: &SpaceOptions) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("fiber dimension must be ≥ 2 (got {n})")));
        }
        match model {
            Model::Flat => Self::analytic(model.clone(), n, Profile::Flat, opts.domain.unwrap_or((0.0, 10.0)), opts),
            Model::Hyperbolic => {
                Self::analytic(model.clone(), n, Profile::Hyperbolic, opts.domain.unwrap_or((0.0, 6.0)), opts)
            }
            &Model::AlphaBeta { alpha, beta } => {
                if !(alpha >= beta && beta >= 0.0) || alpha == 0.0 {
                    return Err(Error::Config(format!(
                        "AlphaBeta needs α ≥ β ≥ 0 with one inequality strict (α = {alpha}, β = {beta})"
                    )));
                }
                Self::analytic(model.clone(), n, Profile::AlphaBeta(alpha, beta), opts.domain.unwrap_or((0.0, 6.0)), opts)
            }
            &Model::AdsSchwarzschild { mass, dim } | &Model::RnAds { mass, dim, .. } => {
                if n + 1 != dim {
                    return Err(Error::Config(format!("static model of dim {dim} has fiber dimension {}", dim - 1)));
                }
                let (kind, q, k) = match model {
                    Model::RnAds { charge, kappa, .. } => (StaticKind::RnAds, *charge, *kappa),
                    _ => (StaticKind::AdsSchwarzschild, 0.0, 1.0),
                };
                let sm = StaticModel::build(
                    kind,
                    mass,
                    q,
                    k,
                    dim,
                    opts.horizon_margin.unwrap_or(DEFAULT_HORIZON_MARGIN),
                    opts.outer_factor.unwrap_or(DEFAULT_OUTER_FACTOR),
                )?;
                Self::statik(model.clone(), Arc::new(sm), opts)
            }
            Model::Custom { .. } => Err(Error::Config("custom warps are built with WarpedSpace::custom".into())),
        }
    }

    /// A user-supplied warping function on (a, b).
    pub fn custom(name: &str, n: usize, domain: (f64, f64), warp: WarpFn) -> Result<Self> {
        let opts = SpaceOptions { domain: Some(domain), ..Default::default() };
        Self::analytic(Model::Custom { name: name.to_string() }, n, Profile::Custom(warp), domain, &opts)
    }

    fn analytic(model: Model, n: usize, profile: Profile, (a, b): (f64, f64), opts: &SpaceOptions) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Config(format!("invalid domain ({a}, {b})")));
        }
        let margin = 1e-3 * (b - a);
        let lo = a + margin;
        let r_ref = opts.r_ref.unwrap_or(0.5 * (a + b));
        if !(r_ref > a && r_ref < b) {
            return Err(Error::Config(format!("r_ref = {r_ref} outside ({a}, {b})")));
        }
        let nf = n as f64;
        let p1 = profile.clone();
        let volume = Primitive::build(
            graded_knots(a, b, PANELS, 1.0),
            Arc::new(move |r| p1.warp(r).map(|w| w.lambda.powf(nf)).unwrap_or(f64::NAN)),
            TOL,
        )?;
        let p2 = profile.clone();
        let ricci_volume = Primitive::build(
            graded_knots(a, b, PANELS, 1.0),
            Arc::new(move |r| p2.warp(r).map(|w| -nf * w.d2lambda * w.lambda.powf(nf - 1.0)).unwrap_or(f64::NAN)),
            TOL,
        )?;
        let p3 = profile.clone();
        let log_rho = Primitive::build(
            graded_knots(lo, b, PANELS, 2.0),
            Arc::new(move |r| p3.warp(r).map(|w| 1.0 / w.lambda).unwrap_or(f64::NAN)),
            TOL,
        )?;
        let log_rho_ref = log_rho.eval(r_ref)?;
        Ok(Self {
            model,
            n,
            a,
            b,
            lower_margin: margin,
            upper_margin: margin,
            r_ref,
            profile,
            statics: None,
            volume,
            ricci_volume,
            log_rho,
            log_rho_ref,
            weighted: None,
        })
    }

    fn statik(model: Model, sm: Arc<StaticModel>, opts: &SpaceOptions) -> Result<Self> {
        let n = sm.fiber_dim();
        let nf = n as f64;
        let (a, b) = (0.0, sm.r_max());
        let r_ref = opts.r_ref.unwrap_or(0.5 * (a + b));
        let profile = Profile::Static(sm.clone());
        let tau_max = (sm.s_max - sm.s0).sqrt();
        // s = s0 + τ² removes the 1/√ singularity of ds/f at the horizon
        let m1 = sm.clone();
        let volume = Primitive::build(
            graded_knots(0.0, tau_max, PANELS, 1.0),
            Arc::new(move |t| {
                let s = m1.s0 + t * t;
                s.powf(nf) * m1.dsdtau_over_f(t)
            }),
            TOL,
        )?;
        let m2 = sm.clone();
        let ricci_volume = Primitive::build(
            graded_knots(0.0, tau_max, PANELS, 1.0),
            Arc::new(move |t| {
                let s = m2.s0 + t * t;
                let (_, d1, _) = m2.f2_derivs(s);
                // −n f′ s^{n−1} ds with f′ = F′/(2f)
                -nf * 0.5 * d1 * s.powf(nf - 1.0) * m2.dsdtau_over_f(t)
            }),
            TOL,
        )?;
        let p3 = profile.clone();
        let log_rho = Primitive::build(
            graded_knots(a, b, PANELS, 1.0),
            Arc::new(move |r| p3.warp(r).map(|w| 1.0 / w.lambda).unwrap_or(f64::NAN)),
            TOL,
        )?;
        let log_rho_ref = log_rho.eval(r_ref)?;
        let p4 = profile.clone();
        let weighted = Primitive::build(
            graded_knots(a, b, PANELS, 1.0),
            Arc::new(move |r| p4.warp(r).map(|w| w.dlambda * w.lambda.powf(nf)).unwrap_or(f64::NAN)),
            TOL,
        )?;
        Ok(Self {
            model,
            n,
            a,
            b,
            lower_margin: 0.0,
            upper_margin: 1e-3 * (b - a),
            r_ref,
            profile,
            statics: Some(sm),
            volume,
            ricci_volume,
            log_rho,
            log_rho_ref,
            weighted: Some(weighted),
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Fiber dimension n of 𝕊ⁿ.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Range admissible for hypersurfaces (domain minus edge margins).
    pub fn working_range(&self) -> (f64, f64) {
        (self.a + self.lower_margin, self.b - self.upper_margin)
    }

    pub fn r_ref(&self) -> f64 {
        self.r_ref
    }

    pub fn static_model(&self) -> Option<&StaticModel> {
        self.statics.as_deref()
    }

    pub fn is_static(&self) -> bool {
        self.statics.is_some()
    }

    pub fn eval(&self, r: f64) -> Result<Warp> {
        if !(r >= self.a && r <= self.b) {
            return Err(Error::Domain(format!("r = {r} outside domain ({}, {})", self.a, self.b)));
        }
        self.profile.warp(r)
    }

    pub fn ricci_rr(&self, r: f64) -> Result<f64> {
        let w = self.eval(r)?;
        if w.lambda == 0.0 {
            return Err(Error::Singular(format!("λ = 0 at r = {r}")));
        }
        Ok(-(self.n as f64) * w.d2lambda / w.lambda)
    }

    /// Ricci curvature on a unit vector tangent to the fiber: −λ″/λ + (n−1)(1 − λ′²)/λ².
    pub fn ricci_tangential(&self, w: &Warp) -> f64 {
        -w.d2lambda / w.lambda + (self.n as f64 - 1.0) * (1.0 - w.dlambda * w.dlambda) / (w.lambda * w.lambda)
    }

    pub fn flatten(&self, r: f64) -> Result<Flattening> {
        let w = self.eval(r)?;
        if !(w.lambda > 0.0) || r < self.log_rho.lo() {
            return Err(Error::Singular(format!("flattening singular at r = {r} (λ = {})", w.lambda)));
        }
        let log_rho = self.log_rho.eval(r)? - self.log_rho_ref;
        Ok(Flattening { rho: log_rho.exp(), omega: w.lambda.ln() - log_rho, domega: (w.dlambda - 1.0) / w.lambda })
    }

    /// ∫ λⁿ dr from the inner end (the horizon for static models) up to r.
    pub fn volume_below(&self, r: f64) -> Result<f64> {
        match &self.statics {
            Some(sm) => self.volume.eval((self.profile_s(r)? - sm.s0).max(0.0).sqrt()),
            None => self.volume.eval(r),
        }
    }

    /// ∫ Ric(∂r, ∂r) λⁿ dr from the inner end up to r.
    pub fn ricci_volume_below(&self, r: f64) -> Result<f64> {
        match &self.statics {
            Some(sm) => self.ricci_volume.eval((self.profile_s(r)? - sm.s0).max(0.0).sqrt()),
            None => self.ricci_volume.eval(r),
        }
    }

    /// ∫ f λⁿ dr from the horizon up to r (static models only): the collar between the
    /// horizon and r = 0 in closed form, the rest by quadrature in r.
    pub fn weighted_volume_below(&self, r: f64) -> Result<f64> {
        let (sm, prim) = match (&self.statics, &self.weighted) {
            (Some(sm), Some(p)) => (sm, p),
            _ => return Err(Error::Config("weighted volume requires a static model".into())),
        };
        let k = self.n as f64 + 1.0;
        let collar = (sm.s_ref.powf(k) - sm.s0.powf(k)) / k;
        Ok(collar + prim.eval(r)?)
    }

    fn profile_s(&self, r: f64) -> Result<f64> {
        Ok(self.eval(r)?.lambda)
    }
}
