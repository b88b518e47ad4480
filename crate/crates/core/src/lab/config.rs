//! Scenario files: flat TOML key/value pairs with a fixed schema.
//!
//! Radii are arclength along the radial geodesic (the r coordinate); for static
//! models the base surface may instead be given as a multiple of the horizon radius s₀.
//! Perturbations are `[l, amplitude]` pairs, each adding amplitude·P_l(cos θ) to r.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ambient::{Model, SpaceOptions, WarpedSpace};
use crate::error::{Error, Result};
use crate::flows::{FlowControls, FlowKind};
use crate::functionals::Theorem;
use crate::hypersurface::{GraphSurface, convexity_margin, geometry_intrinsic};
use crate::spheregrid::{GridMode, SphereGrid};

pub const DEFAULT_RESOLUTION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Flat,
    Hyperbolic,
    AlphaBeta,
    AdsSchwarzschild,
    RnAds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub theorem: Theorem,
    pub model: ModelName,
    /// Fiber dimension for non-static models (static models use `dim − 1`).
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub charge: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Ambient dimension of a static model.
    #[serde(default)]
    pub dim: Option<usize>,
    /// Base radius r₀ (arclength).
    #[serde(default)]
    pub radius: Option<f64>,
    /// Static models: base coordinate sphere s = s_multiple·s₀.
    #[serde(default)]
    pub s_multiple: Option<f64>,
    #[serde(default)]
    pub perturbation: Vec<(u32, f64)>,
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub grid: Option<GridMode>,
    #[serde(default)]
    pub flow: Option<FlowKind>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub dt_init: Option<f64>,
    #[serde(default)]
    pub dt_max: Option<f64>,
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default)]
    pub tol_umbilic: Option<f64>,
    #[serde(default)]
    pub monitor_every: Option<usize>,
    #[serde(default)]
    pub max_steps: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    2
}

/// Everything a scenario resolves to.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub space: Arc<WarpedSpace>,
    pub grid: Arc<SphereGrid>,
    pub surface: GraphSurface,
    pub controls: FlowControls,
    pub base_radius: f64,
    pub resolution: usize,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form, first 16 hex digits.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        let digest = Sha256::digest(&json);
        hex::encode(&digest[..8])
    }

    pub fn model(&self) -> Result<Model> {
        let need = |v: Option<f64>, what: &str| v.ok_or_else(|| Error::Config(format!("model {:?} needs `{what}`", self.model)));
        Ok(match self.model {
            ModelName::Flat => Model::Flat,
            ModelName::Hyperbolic => Model::Hyperbolic,
            ModelName::AlphaBeta => Model::AlphaBeta { alpha: need(self.alpha, "alpha")?, beta: need(self.beta, "beta")? },
            ModelName::AdsSchwarzschild => Model::AdsSchwarzschild { mass: need(self.mass, "mass")?, dim: self.dim.unwrap_or(self.n + 1) },
            ModelName::RnAds => Model::RnAds {
                mass: need(self.mass, "mass")?,
                charge: need(self.charge, "charge")?,
                kappa: self.kappa.unwrap_or(1.0),
                dim: self.dim.unwrap_or(self.n + 1),
            },
        })
    }

    pub fn flow_kind(&self) -> FlowKind {
        self.flow.unwrap_or(match self.theorem {
            Theorem::T1 | Theorem::T2 => FlowKind::Constrained,
            _ => FlowKind::Imcf,
        })
    }

    /// Same scenario with every perturbation amplitude multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut s = self.clone();
        s.perturbation.iter_mut().for_each(|(_, a)| *a *= k);
        s
    }

    pub fn max_amplitude(&self) -> f64 {
        self.perturbation.iter().fold(0.0, |m, (_, a)| m.max(a.abs()))
    }

    pub fn build_space(&self) -> Result<Arc<WarpedSpace>> {
        let model = self.model()?;
        let n = match model {
            Model::AdsSchwarzschild { dim, .. } | Model::RnAds { dim, .. } => dim.saturating_sub(1),
            _ => self.n,
        };
        if !self.theorem.supports(&model) {
            return Err(Error::Config(format!("{} does not apply to {model:?}", self.theorem)));
        }
        Ok(Arc::new(WarpedSpace::from_model(&model, n, &SpaceOptions::default())?))
    }

    pub fn base_radius(&self, space: &WarpedSpace) -> Result<f64> {
        match (self.radius, self.s_multiple, space.static_model()) {
            (Some(_), Some(_), _) => Err(Error::Config("give either `radius` or `s_multiple`, not both".into())),
            (Some(r), None, _) => Ok(r),
            (None, Some(k), Some(sm)) => sm.warp_coordinate(k * sm.s0),
            (None, Some(_), None) => Err(Error::Config("`s_multiple` needs a static model".into())),
            (None, None, Some(sm)) => sm.warp_coordinate(2.0 * sm.s0),
            (None, None, None) => Ok(1.0),
        }
    }

    /// Resolves the scenario, overriding the resolution when `resolution` is given.
    pub fn resolve(&self, resolution: Option<usize>) -> Result<Resolved> {
        let space = self.build_space()?;
        let res = resolution.or(self.resolution).unwrap_or(DEFAULT_RESOLUTION);
        let mode = self.grid.unwrap_or(GridMode::Axisym);
        let grid = Arc::new(SphereGrid::build(space.n(), mode, res)?);
        let r0 = self.base_radius(&space)?;
        let modes = self.perturbation.clone();
        let surface = GraphSurface::from_fn(grid.clone(), space.clone(), |t, _| {
            let x = t.cos();
            r0 + modes.iter().map(|&(l, a)| a * legendre(l, x)).sum::<f64>()
        })?;
        let fields = geometry_intrinsic(&surface)?;
        let margin = convexity_margin(&fields);
        if !(margin > 0.0) {
            return Err(Error::Config(format!("initial surface is not strictly convex (margin {margin:e}); reduce the amplitudes")));
        }
        let kind = self.flow_kind();
        let mut c = FlowControls::new(kind, self.t_max.unwrap_or(match kind {
            FlowKind::Constrained => 50.0,
            FlowKind::Imcf => 1.0,
        }));
        if let Some(v) = self.dt_init {
            c.dt_init = v;
        }
        if let Some(v) = self.dt_max {
            c.dt_max = v;
        }
        if let Some(v) = self.cfl {
            c.cfl = v;
        }
        if let Some(v) = self.tol_umbilic {
            c.tol_umbilic = v;
        }
        if let Some(v) = self.monitor_every {
            c.monitor_every = v;
        }
        if let Some(v) = self.max_steps {
            c.max_steps = v;
        }
        c.dt_init = c.dt_init.min(c.dt_max);
        c.validate()?;
        Ok(Resolved { space, grid, surface, controls: c, base_radius: r0, resolution: res })
    }
}

/// Legendre polynomial P_l(x) by the three-term recurrence.
pub fn legendre(l: u32, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}
