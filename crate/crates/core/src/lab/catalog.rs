//! The model catalog and seeded random corpora of convex radial graphs.
//!
//! Corpus member `k` of seed `s` is drawn from ChaCha8 seeded with `s` on stream `k`, so
//! every member is reproducible on its own and independent of corpus size.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ambient::{Model, SpaceOptions, WarpedSpace};
use crate::error::{Error, Result};
use crate::hypersurface::{GraphSurface, convexity_margin, geometry_intrinsic};
use crate::spheregrid::{GridMode, SphereGrid};

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub space: Arc<WarpedSpace>,
    /// Base radius for corpus surfaces (a coordinate sphere s = 2s₀ for static models).
    pub base_radius: f64,
}

fn entry(name: &'static str, model: Model, n: usize) -> Result<CatalogEntry> {
    let space = Arc::new(WarpedSpace::from_model(&model, n, &SpaceOptions::default())?);
    let base_radius = match space.static_model() {
        Some(sm) => sm.warp_coordinate(2.0 * sm.s0)?,
        None => 1.0,
    };
    Ok(CatalogEntry { name, space, base_radius })
}

/// Flat, hyperbolic, AlphaBeta(1, 0.5), AdS-Schwarzschild (m = 2) and RN-AdS (m = 2, q = 1, κ = 1),
/// all with fiber 𝕊ⁿ.
pub fn catalog(n: usize) -> Result<Vec<CatalogEntry>> {
    Ok(vec![
        entry("flat", Model::Flat, n)?,
        entry("hyperbolic", Model::Hyperbolic, n)?,
        entry("alpha_beta", Model::AlphaBeta { alpha: 1.0, beta: 0.5 }, n)?,
        entry("ads_schwarzschild", Model::AdsSchwarzschild { mass: 2.0, dim: n + 1 }, n)?,
        entry("rn_ads", Model::RnAds { mass: 2.0, charge: 1.0, kappa: 1.0, dim: n + 1 }, n)?,
    ])
}

pub fn catalog_entry(name: &str, n: usize) -> Result<CatalogEntry> {
    catalog(n)?
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Config(format!("no catalog space named {name:?}")))
}

/// Relative size of the random perturbation.
pub const CORPUS_AMPLITUDE: f64 = 0.08;

fn rng_for(seed: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member);
    rng
}

/// One random graph r = r₀(1 + p), p a random polynomial: cubic in cos θ on axisymmetric
/// grids, cubic in the Cartesian coordinates of the direction on full grids. Draws are
/// rejected (with the amplitude halved) until the surface is strictly convex.
pub fn random_graph(grid: &Arc<SphereGrid>, entry: &CatalogEntry, seed: u64, member: u64) -> Result<GraphSurface> {
    let mut rng = rng_for(seed, member);
    let r0 = entry.base_radius;
    let coeffs: Vec<f64> = match grid.mode() {
        GridMode::Axisym => (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(),
        // x, y, z, xy, yz, zx, x², y², z², xyz, x³, y³, z³
        GridMode::Full => (0..13).map(|_| rng.random_range(-1.0..1.0)).collect(),
    };
    let scale = coeffs.iter().map(|c: &f64| c.abs()).sum::<f64>().max(1e-12);
    let mut amp = CORPUS_AMPLITUDE * rng.random_range(0.25..1.0) / scale;
    for _ in 0..20 {
        let c = coeffs.clone();
        let mode = grid.mode();
        let surface = GraphSurface::from_fn(grid.clone(), entry.space.clone(), move |t, ph| {
            let p = match mode {
                GridMode::Axisym => {
                    let x = t.cos();
                    c[0] * x + c[1] * x * x + c[2] * x * x * x
                }
                GridMode::Full => cubic(&c, t, ph),
            };
            r0 * (1.0 + amp * p)
        })?;
        if convexity_margin(&geometry_intrinsic(&surface)?) > 0.0 {
            return Ok(surface);
        }
        amp *= 0.5;
    }
    Err(Error::Config(format!("no convex draw for member {member} of seed {seed} in {}", entry.name)))
}

fn cubic(c: &[f64], t: f64, ph: f64) -> f64 {
    let (x, y, z) = (t.sin() * ph.cos(), t.sin() * ph.sin(), t.cos());
    let m = [x, y, z, x * y, y * z, z * x, x * x, y * y, z * z, x * y * z, x * x * x, y * y * y, z * z * z];
    m.iter().zip(c).map(|(a, b)| a * b).sum()
}

pub fn corpus(grid: &Arc<SphereGrid>, entry: &CatalogEntry, seed: u64, count: usize) -> Result<Vec<GraphSurface>> {
    (0..count as u64).map(|k| random_graph(grid, entry, seed, k)).collect()
}
