use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use warplab::ambient::WarpedSpace;
use warplab::hypersurface::{
    GeometryFields, GraphSurface, convexity_margin, geometry_conformal, geometry_intrinsic, minkowski_residual,
    second_minkowski_residual,
};
use warplab::lab::catalog::{catalog, catalog_entry, random_graph};
use warplab::lab::suite::dual_path_difference;
use warplab::spheregrid::SphereGrid;

fn axisym(res: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::axisym(2, res).unwrap())
}

/// Principal curvatures of the surface of revolution with profile (r sin θ, r cos θ),
/// derivatives of r by central differences.
fn revolution_curvatures(r: impl Fn(f64) -> f64, t: f64) -> (f64, f64) {
    let h = 1e-4;
    let (r0, rp, rm) = (r(t), r(t + h), r(t - h));
    let dr = (rp - rm) / (2.0 * h);
    let ddr = (rp - 2.0 * r0 + rm) / (h * h);
    let (s, c) = t.sin_cos();
    let (x1, z1) = (dr * s + r0 * c, dr * c - r0 * s);
    let (x2, z2) = (ddr * s + 2.0 * dr * c - r0 * s, ddr * c - 2.0 * dr * s - r0 * c);
    let speed = (x1 * x1 + z1 * z1).sqrt();
    let meridian = (x2 * z1 - x1 * z2) / speed.powi(3);
    let parallel = -z1 / (r0 * s * speed);
    (meridian, parallel)
}

#[test]
fn flat_perturbed_sphere_against_parametric_oracle() {
    let grid = axisym(64);
    let space = Arc::new(WarpedSpace::flat(2).unwrap());
    let rf = |t: f64| 1.0 + 0.05 * t.cos();
    let s = GraphSurface::from_fn(grid.clone(), space, |t, _| rf(t)).unwrap();
    for fields in [geometry_intrinsic(&s).unwrap(), geometry_conformal(&s).unwrap()] {
        for (i, &t) in grid.theta_nodes().iter().enumerate() {
            let (k1, k2) = revolution_curvatures(rf, t);
            assert!((fields.mean[i] - (k1 + k2)).abs() < 1e-6, "θ = {t}");
            assert!((fields.aring2[i] - 0.5 * (k1 - k2).powi(2)).abs() < 1e-6);
        }
    }
}

#[test]
fn unit_sphere_in_flat_space() {
    let s = GraphSurface::slice(axisym(16), Arc::new(WarpedSpace::flat(2).unwrap()), 1.0).unwrap();
    for f in [geometry_intrinsic(&s).unwrap(), geometry_conformal(&s).unwrap()] {
        assert!(f.mean.iter().all(|h| (h - 2.0).abs() < 1e-12));
        assert!((convexity_margin(&f) - 1.0).abs() < 1e-12);
        assert!((f.area(s.grid()) - 4.0 * PI).abs() < 1e-12);
    }
}

#[test]
fn slices_are_umbilic_with_kappa_lambda_prime_over_lambda() {
    let grid = axisym(32);
    for e in catalog(2).unwrap() {
        let s = GraphSurface::slice(grid.clone(), e.space.clone(), e.base_radius).unwrap();
        let w = e.space.eval(e.base_radius).unwrap();
        let k = w.dlambda / w.lambda;
        for f in [geometry_intrinsic(&s).unwrap(), geometry_conformal(&s).unwrap()] {
            for p in &f.kappa {
                assert!((p.values[0] - k).abs() < 1e-12 * k.max(1.0) && (p.values[1] - k).abs() < 1e-12 * k.max(1.0), "{}", e.name);
            }
            assert!(f.sup_aring() < 1e-9);
            assert!(f.u.iter().all(|u| (u - w.lambda).abs() < 1e-12 * w.lambda));
        }
    }
    let h = GraphSurface::slice(grid, Arc::new(WarpedSpace::hyperbolic(2).unwrap()), 1.0).unwrap();
    let f = geometry_conformal(&h).unwrap();
    assert!(f.mean.iter().all(|m| (m - 2.0 / 1f64.tanh()).abs() < 1e-12));
    assert!((convexity_margin(&f) - 1.0 / 1f64.tanh()).abs() < 1e-12);
    assert!((convexity_margin(&f) - 1.313).abs() < 1e-3);
}

#[test]
fn slice_identities_vanish() {
    let grid = axisym(16);
    for e in catalog(2).unwrap() {
        let s = GraphSurface::slice(grid.clone(), e.space.clone(), e.base_radius).unwrap();
        let f = geometry_intrinsic(&s).unwrap();
        let scale = f.area(&grid);
        assert!(minkowski_residual(&s, &f).abs() < 1e-10 * scale.max(1.0), "{}", e.name);
        assert!(second_minkowski_residual(&s, &f).abs() < 1e-10 * scale.max(1.0), "{}", e.name);
    }
}

fn pointwise_algebra(f: &GeometryFields) {
    let n = f.n as f64;
    for i in 0..f.len() {
        assert!(f.aring2[i] >= -1e-12);
        assert!((f.aring2[i] - (f.a2[i] - f.mean[i].powi(2) / n)).abs() < 1e-10 * f.a2[i].max(1.0));
        assert!((f.h2[i] - (f.h1[i].powi(2) - f.aring2[i] / (n * (n - 1.0)))).abs() < 1e-10 * f.a2[i].max(1.0));
        assert!(((n - 1.0) * f.h2[i] - (f.mean[i].powi(2) - f.a2[i]) / n).abs() < 1e-10 * f.a2[i].max(1.0));
        assert!(f.v[i] >= 1.0 && f.u[i] > 0.0);
    }
}

#[test]
fn pointwise_algebra_on_the_corpus() {
    for grid in [axisym(32), Arc::new(SphereGrid::full(12, 24).unwrap())] {
        for e in catalog(2).unwrap() {
            for k in 0..4 {
                let s = random_graph(&grid, &e, 11, k).unwrap();
                pointwise_algebra(&geometry_intrinsic(&s).unwrap());
                pointwise_algebra(&geometry_conformal(&s).unwrap());
            }
        }
    }
    // higher fiber dimension
    let g3 = Arc::new(SphereGrid::axisym(3, 24).unwrap());
    let s = GraphSurface::from_fn(g3, Arc::new(WarpedSpace::hyperbolic(3).unwrap()), |t, _| 1.0 + 0.05 * t.cos().powi(2)).unwrap();
    pointwise_algebra(&geometry_intrinsic(&s).unwrap());
}

#[test]
fn dual_path_on_twenty_graphs_at_128() {
    let grid = axisym(128);
    for e in catalog(2).unwrap() {
        for k in 0..20 {
            let s = random_graph(&grid, &e, 3, k).unwrap();
            let d = dual_path_difference(&geometry_intrinsic(&s).unwrap(), &geometry_conformal(&s).unwrap());
            assert!(d < 1e-8, "{} member {k}: {d:e}", e.name);
        }
    }
}

#[test]
fn dual_path_in_full_mode() {
    let grid = Arc::new(SphereGrid::full(16, 32).unwrap());
    for e in catalog(2).unwrap() {
        for k in 0..3 {
            let s = random_graph(&grid, &e, 5, k).unwrap();
            let d = dual_path_difference(&geometry_intrinsic(&s).unwrap(), &geometry_conformal(&s).unwrap());
            assert!(d < 1e-8, "{} member {k}: {d:e}", e.name);
        }
    }
}

#[test]
fn minkowski_residuals_on_perturbed_slices_at_128() {
    let grid = axisym(128);
    for name in ["flat", "hyperbolic", "alpha_beta"] {
        let e = catalog_entry(name, 2).unwrap();
        let r0 = e.base_radius;
        let s = GraphSurface::from_fn(grid.clone(), e.space.clone(), |t, _| r0 * (1.0 + 0.05 * (t.cos() + 0.5 * t.cos().powi(2)))).unwrap();
        let f = geometry_intrinsic(&s).unwrap();
        assert!(minkowski_residual(&s, &f).abs() < 1e-8, "{name}");
        assert!(second_minkowski_residual(&s, &f).abs() < 1e-7, "{name}");
    }
}

#[test]
fn minkowski_residual_converges_under_refinement() {
    let e = catalog_entry("hyperbolic", 2).unwrap();
    let res = |n: usize| {
        let s = GraphSurface::from_fn(axisym(n), e.space.clone(), |t, _| 1.0 + 0.2 * (2.0 * t.cos()).sin()).unwrap();
        let f = geometry_intrinsic(&s).unwrap();
        (minkowski_residual(&s, &f).abs(), second_minkowski_residual(&s, &f).abs())
    };
    let ((a8, b8), (a16, b16)) = (res(8), res(16));
    assert!(a16 < a8 / 4.0, "{a8:e} → {a16:e}");
    assert!(b16 < b8 / 4.0, "{b8:e} → {b16:e}");
}

#[test]
fn flat_ellipsoid_total_curvature_and_second_minkowski() {
    // Euclidean oracle: for a closed convex surface H₂ = K and ∫K = 4π (Gauss–Bonnet)
    let grid = Arc::new(SphereGrid::full(24, 48).unwrap());
    let (a, b, c) = (1.0, 0.9, 0.8);
    let s = GraphSurface::from_fn(grid.clone(), Arc::new(WarpedSpace::flat(2).unwrap()), |t, p| {
        let (x, y, z) = (t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
        1.0 / (x * x / (a * a) + y * y / (b * b) + z * z / (c * c)).sqrt()
    })
    .unwrap();
    let f = geometry_intrinsic(&s).unwrap();
    assert!((f.integrate(&grid, |i| f.h2[i]) - 4.0 * PI).abs() < 1e-8);
    let lhs = f.integrate(&grid, |i| f.u[i] * f.h2[i]);
    let rhs = f.integrate(&grid, |i| f.h1[i]);
    assert!((lhs - rhs).abs() < 1e-8);
    assert!(second_minkowski_residual(&s, &f).abs() < 1e-8);
    // enclosed volume by u/(n+1): 4π abc/3
    let vol = f.integrate(&grid, |i| f.u[i]) / 3.0;
    assert!((vol - 4.0 * PI * a * b * c / 3.0).abs() < 1e-8);
}

#[test]
fn convexity_loss_found_by_bisection() {
    let grid = axisym(64);
    let space = Arc::new(WarpedSpace::flat(2).unwrap());
    let margin = |amp: f64| {
        let s = GraphSurface::from_fn(grid.clone(), space.clone(), |t, _| {
            let x = t.cos();
            1.0 + amp * (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0
        })
        .unwrap();
        convexity_margin(&geometry_intrinsic(&s).unwrap())
    };
    let (mut lo, mut hi) = (0.0, 0.3);
    assert!(margin(lo) > 0.0 && margin(hi) < 0.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) > 0.0 { lo = mid } else { hi = mid }
    }
    assert!(hi - lo < 1e-9);
    assert!(margin(1.01 * hi) < 0.0);
    assert!(margin(0.99 * lo) > 0.0);
}

#[test]
fn umbilicity_detects_slices_only() {
    let grid = axisym(32);
    for e in catalog(2).unwrap() {
        let slice = GraphSurface::slice(grid.clone(), e.space.clone(), e.base_radius).unwrap();
        assert!(geometry_intrinsic(&slice).unwrap().sup_aring() < 1e-9);
        for k in 0..10 {
            let s = random_graph(&grid, &e, 19, k).unwrap();
            assert!(geometry_intrinsic(&s).unwrap().sup_aring() > 1e-9, "{} member {k}", e.name);
        }
    }
}

#[test]
fn out_of_range_and_mismatched_surfaces_are_rejected() {
    let space = Arc::new(WarpedSpace::hyperbolic(2).unwrap());
    assert!(GraphSurface::slice(axisym(16), space.clone(), 100.0).is_err());
    let g3 = Arc::new(SphereGrid::axisym(3, 16).unwrap());
    assert!(GraphSurface::slice(g3, space.clone(), 1.0).is_err());
    assert!(GraphSurface::new(axisym(16), space, vec![1.0; 3]).is_err());
}

#[test]
fn under_resolved_graphs_are_rejected() {
    let grid = axisym(16);
    let space = Arc::new(WarpedSpace::flat(2).unwrap());
    let rough = grid.sample(|t, _| 1.0 + 0.05 * (15.0 * t).cos());
    assert!(GraphSurface::new(grid.clone(), space.clone(), rough.clone()).is_err());
    assert!(GraphSurface::unchecked(grid, space, rough).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dual_path_agrees_on_random_zonal_graphs(c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, c3 in -1.0f64..1.0, which in 0usize..5) {
        let e = &catalog(2).unwrap()[which];
        let grid = axisym(48);
        let amp = 0.06 / (c1.abs() + c2.abs() + c3.abs()).max(1.0);
        let r0 = e.base_radius;
        let s = GraphSurface::from_fn(grid, e.space.clone(), |t, _| {
            let x = t.cos();
            r0 * (1.0 + amp * (c1 * x + c2 * x * x + c3 * x.powi(3)))
        }).unwrap();
        let a = geometry_intrinsic(&s).unwrap();
        let b = geometry_conformal(&s).unwrap();
        prop_assert!(dual_path_difference(&a, &b) < 1e-8);
        prop_assert!(minkowski_residual(&s, &a).abs() < 1e-8);
    }

    #[test]
    fn slice_geometry_is_scale_consistent(r in 0.3f64..4.0) {
        let s = GraphSurface::slice(axisym(8), Arc::new(WarpedSpace::hyperbolic(2).unwrap()), r).unwrap();
        let f = geometry_intrinsic(&s).unwrap();
        prop_assert!((f.area(s.grid()) - 4.0 * PI * r.sinh().powi(2)).abs() < 1e-10 * r.sinh().powi(2) * 4.0 * PI);
        prop_assert!((f.h2[0] - (1.0 / r.tanh()).powi(2)).abs() < 1e-10 * f.h2[0]);
    }
}
