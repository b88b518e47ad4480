use std::f64::consts::PI;

use proptest::prelude::*;
use warplab::Error;
use warplab::spheregrid::{GridMode, SphereGrid, sphere_area};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// Legendre by recurrence, kept local so the tests do not lean on library code.
fn p_l(l: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if l == 0 {
        return a;
    }
    for k in 1..l {
        let k = k as f64;
        let c = ((2.0 * k + 1.0) * x * b - k * a) / (k + 1.0);
        a = b;
        b = c;
    }
    b
}

#[test]
fn weights_sum_to_sphere_area() {
    let g = SphereGrid::build(2, GridMode::Axisym, 64).unwrap();
    assert!((g.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
    let g = SphereGrid::full(32, 64).unwrap();
    assert!((g.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
    for n in 3..6 {
        let g = SphereGrid::axisym(n, 24).unwrap();
        let area = sphere_area(n);
        assert!((g.area() - area).abs() < 1e-12 * area, "n = {n}");
    }
    assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-14);
}

#[test]
fn unsupported_builds_are_config_errors() {
    assert!(matches!(SphereGrid::build(3, GridMode::Full, 32), Err(Error::Config(_))));
    assert!(matches!(SphereGrid::build(2, GridMode::Axisym, 6), Err(Error::Config(_))));
    assert!(matches!(SphereGrid::full(8, 9), Err(Error::Config(_))));
}

#[test]
fn builds_are_deterministic() {
    let a = SphereGrid::full(16, 32).unwrap();
    let b = SphereGrid::full(16, 32).unwrap();
    assert_eq!(a.theta_nodes(), b.theta_nodes());
    assert_eq!(a.weights(), b.weights());
}

#[test]
fn quadrature_examples() {
    for g in [SphereGrid::axisym(2, 64).unwrap(), SphereGrid::full(32, 64).unwrap()] {
        let one = g.sample(|_, _| 1.0);
        assert!((g.integrate(&one).unwrap() - 4.0 * PI).abs() < 1e-12);
        let c2 = g.sample(|t, _| t.cos().powi(2));
        assert!((g.integrate(&c2).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
        let y20 = g.sample(|t, _| (5.0 / (16.0 * PI)).sqrt() * (3.0 * t.cos().powi(2) - 1.0));
        assert!(g.integrate(&y20).unwrap().abs() < 1e-10);
    }
}

#[test]
fn zonal_harmonics_integrate_to_zero_up_to_half_resolution() {
    let res = 64;
    let g = SphereGrid::axisym(2, res).unwrap();
    for l in 1..=res / 2 {
        let f = g.sample(|t, _| p_l(l, t.cos()));
        assert!(g.integrate(&f).unwrap().abs() < 1e-10, "l = {l}");
    }
}

#[test]
fn non_finite_fields_are_rejected() {
    let g = SphereGrid::axisym(2, 16).unwrap();
    let mut f = vec![1.0; g.len()];
    f[3] = f64::NAN;
    assert!(matches!(g.integrate(&f), Err(Error::Numeric(_))));
    assert!(g.laplace(&f).is_err());
}

#[test]
fn constant_field_has_zero_derivatives() {
    for g in [SphereGrid::axisym(2, 32).unwrap(), SphereGrid::axisym(4, 32).unwrap(), SphereGrid::full(16, 32).unwrap()] {
        let c = vec![2.5; g.len()];
        let d = g.derivatives(&c).unwrap();
        for (gr, h) in d.grad.iter().zip(&d.hess) {
            assert_eq!(*gr, [0.0, 0.0]);
            assert_eq!((h.tt, h.tp, h.pp), (0.0, 0.0, 0.0));
        }
        assert!(g.laplace(&c).unwrap().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn laplacian_eigenfunctions_at_128() {
    let g = SphereGrid::axisym(2, 128).unwrap();
    let f = g.sample(|t, _| t.cos());
    let want: Vec<f64> = f.iter().map(|v| -2.0 * v).collect();
    assert!(max_abs_diff(&g.laplace(&f).unwrap(), &want) < 1e-6);

    let y30 = |t: f64| (7.0 / (16.0 * PI)).sqrt() * (5.0 * t.cos().powi(3) - 3.0 * t.cos());
    let f = g.sample(|t, _| y30(t));
    let want: Vec<f64> = f.iter().map(|v| -12.0 * v).collect();
    assert!(max_abs_diff(&g.laplace(&f).unwrap(), &want) < 1e-6);
}

#[test]
fn laplacian_eigenvalues_in_higher_dimension() {
    // cos θ on 𝕊ⁿ has eigenvalue −n
    for n in 2..6 {
        let g = SphereGrid::axisym(n, 32).unwrap();
        let f = g.sample(|t, _| t.cos());
        let want: Vec<f64> = f.iter().map(|v| -(n as f64) * v).collect();
        assert!(max_abs_diff(&g.laplace(&f).unwrap(), &want) < 1e-10, "n = {n}");
    }
}

#[test]
fn operators_converge_on_a_non_polynomial_field() {
    // f = e^{cos θ}: Δf = e^x (1 − x² − 2x) on 𝕊², x = cos θ
    let err = |res: usize| {
        let g = SphereGrid::axisym(2, res).unwrap();
        let f = g.sample(|t, _| t.cos().exp());
        let want = g.sample(|t, _| {
            let x = t.cos();
            x.exp() * (1.0 - x * x - 2.0 * x)
        });
        max_abs_diff(&g.laplace(&f).unwrap(), &want)
    };
    let (e8, e16) = (err(8), err(16));
    assert!(e16 < e8 / 4.0, "{e8:e} → {e16:e}");
    assert!(e16 < 1e-8);
}

#[test]
fn gradient_and_hessian_of_cos_theta() {
    // grad cos θ = (−sin θ, 0); Hess cos θ = −cos θ · σ
    let g = SphereGrid::axisym(2, 32).unwrap();
    let f = g.sample(|t, _| t.cos());
    let d = g.derivatives(&f).unwrap();
    for (i, t) in g.theta_nodes().iter().enumerate() {
        assert!((d.grad[i][0] + t.sin()).abs() < 1e-12);
        assert!((d.hess[i].tt + t.cos()).abs() < 1e-11);
        assert!((d.hess[i].pp + t.cos()).abs() < 1e-11);
        assert!((d.hess[i].trace(2) + 2.0 * t.cos()).abs() < 1e-11);
    }
}

#[test]
fn full_mode_pole_regularity() {
    // f = sin θ cos φ = x₁ is an l = 1 eigenfunction; its derivatives stay bounded near the poles
    let g = SphereGrid::full(24, 48).unwrap();
    let f = g.sample(|t, p| t.sin() * p.cos());
    let d = g.derivatives(&f).unwrap();
    let lap = g.laplace(&f).unwrap();
    for i in 0..g.len() {
        let (t, p) = g.node(i);
        // orthonormal frame: ∂_θ f = cos θ cos φ, (1/sin θ)∂_φ f = −sin φ
        assert!((d.grad[i][0] - t.cos() * p.cos()).abs() < 1e-11);
        assert!((d.grad[i][1] + p.sin()).abs() < 1e-11);
        assert!((lap[i] + 2.0 * f[i]).abs() < 1e-10);
        assert!(d.hess[i].norm2(2).sqrt() < 2.0);
    }
}

#[test]
fn full_mode_harmonic_with_longitude_dependence() {
    // Y₂₂ ∝ sin²θ cos 2φ, eigenvalue −6
    let g = SphereGrid::full(16, 32).unwrap();
    let f = g.sample(|t, p| t.sin().powi(2) * (2.0 * p).cos());
    let lap = g.laplace(&f).unwrap();
    let want: Vec<f64> = f.iter().map(|v| -6.0 * v).collect();
    assert!(max_abs_diff(&lap, &want) < 1e-10);
    assert!(g.integrate(&f).unwrap().abs() < 1e-12);
}

#[test]
fn interpolation_reproduces_smooth_fields() {
    let g = SphereGrid::full(16, 32).unwrap();
    let f = g.sample(|t, p| (t.cos() + 0.3 * t.sin() * p.sin()).exp());
    for (t, p) in [(0.3, 1.0), (1.7, 4.0), (3.0, 0.2)] {
        let want = (f64::cos(t) + 0.3 * f64::sin(t) * f64::sin(p)).exp();
        assert!((g.interpolate(&f, t, p).unwrap() - want).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_integrates_to_zero(coef in prop::collection::vec(-1.0f64..1.0, 6), full in any::<bool>()) {
        let g = if full { SphereGrid::full(16, 32).unwrap() } else { SphereGrid::axisym(2, 24).unwrap() };
        let f = g.sample(|t, p| {
            let x = t.cos();
            coef[0] + coef[1] * x + coef[2] * x * x + coef[3] * x.powi(5)
                + coef[4] * t.sin() * p.cos() + coef[5] * (x + t.sin() * p.sin()).exp()
        });
        let lap = g.laplace(&f).unwrap();
        prop_assert!(g.integrate(&lap).unwrap().abs() < 1e-10);
    }

    #[test]
    fn laplacian_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = SphereGrid::axisym(3, 16).unwrap();
        let f1 = g.sample(|t, _| t.cos().powi(3));
        let f2 = g.sample(|t, _| (2.0 * t).sin().powi(2));
        let mix: Vec<f64> = f1.iter().zip(&f2).map(|(x, y)| a * x + b * y).collect();
        let (l1, l2, lm) = (g.laplace(&f1).unwrap(), g.laplace(&f2).unwrap(), g.laplace(&mix).unwrap());
        let combo: Vec<f64> = l1.iter().zip(&l2).map(|(x, y)| a * x + b * y).collect();
        prop_assert!(max_abs_diff(&lm, &combo) < 1e-10);
    }
}
