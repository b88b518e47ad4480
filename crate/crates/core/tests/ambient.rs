use proptest::prelude::*;
use warplab::Error;
use warplab::ambient::{Model, SpaceOptions, StaticModel, WarpedSpace, check_assumptions, check_static_identity};

#[test]
fn eval_closed_forms() {
    let w = WarpedSpace::flat(2).unwrap().eval(1.0).unwrap();
    assert_eq!((w.lambda, w.dlambda, w.d2lambda), (1.0, 1.0, 0.0));
    let w = WarpedSpace::hyperbolic(2).unwrap().eval(1.0).unwrap();
    assert_eq!((w.lambda, w.dlambda, w.d2lambda), (1f64.sinh(), 1f64.cosh(), 1f64.sinh()));
    let ab = WarpedSpace::alpha_beta(2, 1.0, 0.0).unwrap();
    for r in [0.3, 1.0, 2.5] {
        let w = ab.eval(r).unwrap();
        assert_eq!(w.d2lambda, w.lambda);
    }
}

#[test]
fn eval_outside_domain_is_a_domain_error() {
    let h = WarpedSpace::hyperbolic(2).unwrap();
    assert!(matches!(h.eval(-0.5), Err(Error::Domain(_))));
    assert!(matches!(h.eval(100.0), Err(Error::Domain(_))));
}

#[test]
fn ricci_rr_values() {
    assert_eq!(WarpedSpace::flat(2).unwrap().ricci_rr(1.3).unwrap(), 0.0);
    assert!((WarpedSpace::hyperbolic(2).unwrap().ricci_rr(1.3).unwrap() + 2.0).abs() < 1e-15);
    for n in [2, 3, 4] {
        let ab = WarpedSpace::alpha_beta(n, 1.0, 0.5).unwrap();
        for r in [0.1, 0.7, 2.0, 4.5] {
            assert!((ab.ricci_rr(r).unwrap() + n as f64).abs() < 1e-14, "n = {n}, r = {r}");
        }
    }
    // λ = 0 at the origin
    assert!(matches!(WarpedSpace::hyperbolic(2).unwrap().ricci_rr(0.0), Err(Error::Singular(_))));
}

#[test]
fn alpha_beta_ordering_is_enforced() {
    assert!(matches!(WarpedSpace::alpha_beta(2, 0.5, 1.0), Err(Error::Config(_))));
    assert!(matches!(WarpedSpace::alpha_beta(2, 0.0, 0.0), Err(Error::Config(_))));
}

#[test]
fn hyperbolic_assumptions() {
    let rep = check_assumptions(&WarpedSpace::hyperbolic(2).unwrap(), 1000).unwrap();
    for name in ["lambda_positive", "lambda_prime_positive", "convexity_condition", "ricci_bound"] {
        assert!(rep.get(name).unwrap().pass, "{name}");
    }
    // cosh² − sinh² = 1, so the bound is attained
    assert!(rep.get("ricci_bound").unwrap().margin.abs() < 1e-9);
}

#[test]
fn alpha_beta_bound_failure() {
    let rep = check_assumptions(&WarpedSpace::alpha_beta(2, 2.0, 0.0).unwrap(), 200).unwrap();
    let c = rep.get("alphabeta_bound").unwrap();
    assert!(!c.pass);
    assert!((c.margin + 3.0).abs() < 1e-15);
    assert!(!rep.all_pass());
}

#[test]
fn sampling_density_is_checked() {
    assert!(matches!(check_assumptions(&WarpedSpace::hyperbolic(2).unwrap(), 50), Err(Error::Config(_))));
}

#[test]
fn ads_schwarzschild_static_hypotheses() {
    let rep = check_assumptions(&WarpedSpace::ads_schwarzschild(2.0, 3).unwrap(), 10_000).unwrap();
    for name in ["H1", "H2", "H3", "H4", "H5_nondecreasing", "H5_concave"] {
        let c = rep.get(name).unwrap();
        assert!(c.pass && c.margin.is_finite(), "{name}: {c:?}");
    }
}

#[test]
fn h5_oracle_by_second_differences() {
    // P(x) = R(x^{1/(n−1)}) x with R = (f²)′ − 2κ²s; for AdSS(m = 2, dim 3), R = 2/s², P = 2/x
    let sm = StaticModel::ads_schwarzschild(2.0, 3).unwrap();
    let p = |x: f64| {
        let s = x.sqrt();
        2.0 / (s * s) * x
    };
    let h = 1e-2;
    let xs: Vec<f64> = (1..2000).map(|i| sm.s0.powi(2) + i as f64 * h).collect();
    for x in xs {
        assert!(p(x + h) - p(x) >= -1e-12);
        assert!(p(x + h) - 2.0 * p(x) + p(x - h) <= 1e-12);
        let (_, d1, _) = sm.f2_derivs(x.sqrt());
        assert!(((d1 - 2.0 * x.sqrt()) * x - p(x)).abs() < 1e-12 * p(x).abs().max(1.0));
    }
}

#[test]
fn assumptions_are_monotone_in_the_domain() {
    let wide = SpaceOptions { domain: Some((0.0, 6.0)), ..Default::default() };
    let narrow = SpaceOptions { domain: Some((1.0, 3.0)), ..Default::default() };
    for model in [Model::Hyperbolic, Model::AlphaBeta { alpha: 1.0, beta: 0.5 }, Model::Flat] {
        let a = check_assumptions(&WarpedSpace::from_model(&model, 2, &wide).unwrap(), 400).unwrap();
        let b = check_assumptions(&WarpedSpace::from_model(&model, 2, &narrow).unwrap(), 400).unwrap();
        for c in &a.conditions {
            if c.pass {
                assert!(b.get(&c.name).unwrap().pass, "{model:?}: {} flipped", c.name);
            }
        }
    }
}

#[test]
fn warp_coordinate_round_trip_and_dual_quadrature() {
    let sm = StaticModel::ads_schwarzschild(2.0, 3).unwrap();
    let s = 2.0 * sm.s0;
    let r = sm.warp_coordinate(s).unwrap();
    assert!((sm.s_of_r(r).unwrap() - s).abs() < 1e-10 * s);

    let r3 = sm.warp_coordinate(3.0).unwrap();
    let direct = sm.warp_coordinate_direct(3.0, 5e-13).unwrap();
    assert!((r3 - direct).abs() < 1e-10, "{r3} vs {direct}");
    assert!(sm.warp_coordinate(2.5).unwrap() < r3);

    assert!(matches!(sm.warp_coordinate(sm.s0), Err(Error::Horizon(_))));
    assert!(matches!(sm.warp_coordinate(0.5 * sm.s0), Err(Error::Horizon(_))));
}

#[test]
fn static_lambda_consistency() {
    for space in [WarpedSpace::ads_schwarzschild(2.0, 3).unwrap(), WarpedSpace::rn_ads(2.0, 1.0, 1.0, 3).unwrap()] {
        let sm = space.static_model().unwrap().clone();
        for k in [1.1, 1.5, 2.0, 4.0, 10.0] {
            let s = k * sm.s0;
            let r = sm.warp_coordinate(s).unwrap();
            let w = space.eval(r).unwrap();
            assert!((w.lambda - s).abs() < 1e-9 * s);
            assert!((w.dlambda - sm.f(s).0).abs() < 1e-9);
        }
    }
}

#[test]
fn static_identities() {
    let adss = StaticModel::ads_schwarzschild(2.0, 3).unwrap();
    assert!(check_static_identity(&adss, 400) < 1e-8);
    let rn = StaticModel::rn_ads(2.0, 1.0, 1.0, 3).unwrap();
    assert!(check_static_identity(&rn, 400) < 1e-8);
    for dim in [4, 5] {
        assert!(check_static_identity(&StaticModel::ads_schwarzschild(1.5, dim).unwrap(), 200) < 1e-8, "dim {dim}");
    }
}

#[test]
fn rn_with_zero_charge_reduces_to_ads_schwarzschild() {
    // each model keeps its own mass normalization: c = m (AdSS) and c = 2m (RN)
    let rn = StaticModel::rn_ads(1.0, 0.0, 1.0, 3).unwrap();
    let adss = StaticModel::ads_schwarzschild(2.0, 3).unwrap();
    assert!((rn.s0 - adss.s0).abs() < 1e-14);
    for s in [1.5, 3.0, 7.0] {
        assert_eq!(rn.f2_derivs(s), adss.f2_derivs(s));
        assert!((rn.trace_residual(s) - adss.trace_residual(s)).abs() < 1e-12);
    }
}

#[test]
fn rn_trace_residual_against_hand_derivatives() {
    // f² = 1 + s² − 4/s + 1/s², differentiated by hand
    let (m, q) = (2.0, 1.0);
    let big = |s: f64| 1.0 + s * s - 2.0 * m / s + q * q / (s * s);
    let d1 = |s: f64| 2.0 * s + 2.0 * m / (s * s) - 2.0 * q * q / s.powi(3);
    let d2 = |s: f64| 2.0 - 4.0 * m / s.powi(3) + 6.0 * q * q / s.powi(4);
    let rn = StaticModel::rn_ads(m, q, 1.0, 3).unwrap();
    for s in [1.5 * rn.s0, 2.0, 4.0, 10.0 * rn.s0] {
        let f = big(s).sqrt();
        // Δ̄f = (f/s²)(s² F′/2)′ for ḡ = ds²/F + s²σ
        let lap = f * (d1(s) / s + 0.5 * d2(s));
        let scal = 2.0 * ((1.0 - big(s)) / (s * s) - d1(s) / s);
        let residual = 2.0 * lap + f * scal - 4.0 * q * q * f / s.powi(4);
        assert!(residual.abs() < 1e-10, "s = {s}: {residual:e}");
        assert!((rn.laplacian_f(s) - lap).abs() < 1e-10 * lap.abs());
        assert!((rn.scalar_curvature(s) - scal).abs() < 1e-10 * scal.abs().max(1.0));
        assert!((rn.trace_residual(s) - residual).abs() < 1e-9);
    }
}

#[test]
fn laplacian_of_f_against_divergence_form_differences() {
    let sm = StaticModel::ads_schwarzschild(2.0, 3).unwrap();
    let flux = |s: f64| s * s * sm.f(s).0 * sm.f(s).1;
    for s in [1.5, 2.5, 5.0] {
        let h = 1e-4 * s;
        let fd = sm.f(s).0 / (s * s) * (flux(s + h) - flux(s - h)) / (2.0 * h);
        assert!((fd - sm.laplacian_f(s)).abs() < 1e-6 * fd.abs());
    }
}

#[test]
fn flat_flattening_is_trivial() {
    let opts = SpaceOptions { r_ref: Some(1.0), ..Default::default() };
    let flat = WarpedSpace::from_model(&Model::Flat, 2, &opts).unwrap();
    for r in [0.5, 1.0, 3.0] {
        let fl = flat.flatten(r).unwrap();
        assert!((fl.rho - r).abs() < 1e-12);
        assert!(fl.omega.abs() < 1e-12);
        assert_eq!(fl.domega, 0.0);
    }
}

#[test]
fn hyperbolic_flattening_against_tanh() {
    let h = WarpedSpace::hyperbolic(2).unwrap();
    let pairs = [(0.2, 1.0), (1.0, 3.0), (0.5, 5.5)];
    for (r, rp) in pairs {
        let ratio = h.flatten(r).unwrap().rho / h.flatten(rp).unwrap().rho;
        let want = (r / 2.0).tanh() / (rp / 2.0).tanh();
        assert!((ratio - want).abs() < 1e-10 * want, "{r}, {rp}");
    }
}

#[test]
fn flattening_is_singular_where_lambda_vanishes() {
    assert!(matches!(WarpedSpace::hyperbolic(2).unwrap().flatten(0.0), Err(Error::Singular(_))));
}

#[test]
fn omega_bounded_on_compact_ranges() {
    for space in [WarpedSpace::hyperbolic(2).unwrap(), WarpedSpace::ads_schwarzschild(2.0, 3).unwrap()] {
        let (lo, hi) = space.working_range();
        let (r1, r2) = (lo + 0.1 * (hi - lo), lo + 0.6 * (hi - lo));
        let (mut sup_w, mut sup_dw) = (0.0f64, 0.0f64);
        for i in 0..=100 {
            let fl = space.flatten(r1 + (r2 - r1) * i as f64 / 100.0).unwrap();
            sup_w = sup_w.max(fl.omega.abs());
            sup_dw = sup_dw.max(fl.domega.abs());
        }
        assert!(sup_w.is_finite() && sup_dw.is_finite());
    }
}

fn conformal_identity(space: &WarpedSpace, r: f64) -> f64 {
    // e^{2ω}(dρ/dr)² with dρ/dr by central differences of the quadrature ρ
    let h = 1e-5;
    let fl = space.flatten(r).unwrap();
    let drho = (space.flatten(r + h).unwrap().rho - space.flatten(r - h).unwrap().rho) / (2.0 * h);
    (2.0 * fl.omega).exp() * drho * drho
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conformal_factor_identity(r in 0.2f64..5.0) {
        let h = WarpedSpace::hyperbolic(2).unwrap();
        prop_assert!((conformal_identity(&h, r) - 1.0).abs() < 1e-8);
        let fl = h.flatten(r).unwrap();
        let w = h.eval(r).unwrap();
        // closed-form derivative: dρ/dr = ρ/λ
        prop_assert!(((2.0 * fl.omega).exp() * (fl.rho / w.lambda).powi(2) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rho_strictly_increasing(a in 0.1f64..5.0, d in 1e-3f64..0.5) {
        let ab = WarpedSpace::alpha_beta(2, 1.0, 0.5).unwrap();
        prop_assert!(ab.flatten(a + d).unwrap().rho > ab.flatten(a).unwrap().rho);
    }

    #[test]
    fn static_round_trip(k in 1.02f64..40.0) {
        let sm = StaticModel::rn_ads(2.0, 1.0, 1.0, 3).unwrap();
        let s = k * sm.s0;
        let back = sm.s_of_r(sm.warp_coordinate(s).unwrap()).unwrap();
        prop_assert!((back - s).abs() < 1e-10 * s);
    }
}
