use std::f64::consts::PI;

/// Nodes ascending in `x`, weights for the weight function `(1 - x²)^a` on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize) -> GaussRule {
    gauss_jacobi_symmetric(n, 0.0)
}

/// ∫₋₁¹ (1 − x²)^a dx for integer or half-integer `a ≥ 0`.
pub fn jacobi_weight_mass(a: f64) -> f64 {
    let twice = (2.0 * a).round() as i64;
    assert!(twice >= 0 && (2.0 * a - twice as f64).abs() < 1e-12, "a must be a non-negative half-integer");
    let (mut m, mut k) = if twice % 2 == 0 { (2.0, 0.0) } else { (PI / 2.0, 0.5) };
    while k < a - 1e-12 {
        k += 1.0;
        m *= 2.0 * k / (2.0 * k + 1.0);
    }
    m
}

/// Evaluates P_n and P_{n-1} of the symmetric Jacobi family P^(a,a) at x.
fn jacobi_pair(n: usize, a: f64, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (p0, 0.0);
    }
    let mut p1 = (a + 1.0) * x;
    for k in 2..=n {
        let kf = k as f64;
        let c = 2.0 * kf + 2.0 * a;
        let p2 = ((c - 1.0) * c * (c - 2.0) * x * p1 - 2.0 * (kf + a - 1.0).powi(2) * c * p0)
            / (2.0 * kf * (kf + 2.0 * a) * (c - 2.0));
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss–Jacobi rule with α = β = a via Newton iteration on the three-term recurrence.
pub fn gauss_jacobi_symmetric(n: usize, a: f64) -> GaussRule {
    assert!(n >= 1);
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut raw = Vec::with_capacity(n);
    for k in 1..=n {
        // exact for a = ±1/2, within the Newton basin otherwise
        let theta = (k as f64 - 0.25 + 0.5 * a) * PI / (nf + a + 0.5);
        let mut x = theta.cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, q) = jacobi_pair(n, a, x);
            dp = (-nf * x * p + (nf + a) * q) / (1.0 - x * x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * (1.0 + x.abs()) {
                break;
            }
        }
        let (p, q) = jacobi_pair(n, a, x);
        let d = (-nf * x * p + (nf + a) * q) / (1.0 - x * x);
        if d.is_finite() {
            dp = d;
        }
        nodes.push(x);
        raw.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    nodes.reverse();
    raw.reverse();
    let total: f64 = raw.iter().sum();
    let mass = jacobi_weight_mass(a);
    let weights = raw.iter().map(|w| w * mass / total).collect();
    GaussRule { nodes, weights }
}
