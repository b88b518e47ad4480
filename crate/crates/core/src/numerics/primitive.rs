use std::fmt;
use std::sync::Arc;

use super::integrate::{gauss_legendre_fixed, integrate_adaptive};
use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tabulated antiderivative `x ↦ ∫_{x₀}^x g`, exact at knots up to the quadrature
/// tolerance and completed by a 16-point Gauss rule inside a panel.
#[derive(Clone)]
pub struct Primitive {
    knots: Vec<f64>,
    cum: Vec<f64>,
    g: ScalarFn,
}

impl fmt::Debug for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Primitive")
            .field("lo", &self.lo())
            .field("hi", &self.hi())
            .field("panels", &(self.knots.len() - 1))
            .finish()
    }
}

/// `count + 1` knots on [lo, hi], clustered toward `lo` when `power > 1`.
pub fn graded_knots(lo: f64, hi: f64, count: usize, power: f64) -> Vec<f64> {
    (0..=count)
        .map(|i| {
            if i == count {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / count as f64).powf(power)
            }
        })
        .collect()
}

impl Primitive {
    pub fn build(knots: Vec<f64>, g: ScalarFn, tol: f64) -> Result<Self> {
        if knots.len() < 2 || knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("primitive knots must be strictly increasing".into()));
        }
        let mut cum = Vec::with_capacity(knots.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for w in knots.windows(2) {
            acc += integrate_adaptive(|x| g(x), w[0], w[1], tol, tol)?;
            cum.push(acc);
        }
        Ok(Self { knots, cum, g })
    }

    pub fn lo(&self) -> f64 {
        self.knots[0]
    }

    pub fn hi(&self) -> f64 {
        *self.knots.last().expect("non-empty")
    }

    pub fn integrand(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (self.lo(), self.hi());
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain(format!("primitive evaluated at {x} outside [{lo}, {hi}]")));
        }
        let k = self.knots.partition_point(|&t| t <= x).clamp(1, self.knots.len() - 1) - 1;
        let (a, b) = (self.knots[k], self.knots[k + 1]);
        let g = &self.g;
        Ok(if x - a <= b - x {
            self.cum[k] + gauss_legendre_fixed(|t| g(t), a, x)
        } else {
            self.cum[k + 1] - gauss_legendre_fixed(|t| g(t), x, b)
        })
    }

    /// Total integral over the knot range.
    pub fn total(&self) -> f64 {
        *self.cum.last().expect("non-empty")
    }

    /// Inverse of an increasing primitive (positive integrand): the `x` with `eval(x) = y`.
    pub fn invert(&self, y: f64) -> Result<f64> {
        let total = self.total();
        if !(y >= 0.0 && y <= total) {
            return Err(Error::Domain(format!("primitive value {y} outside [0, {total}]")));
        }
        let k = self.cum.partition_point(|&c| c <= y).clamp(1, self.cum.len() - 1) - 1;
        let (mut lo, mut hi) = (self.knots[k], self.knots[k + 1]);
        let (c0, c1) = (self.cum[k], self.cum[k + 1]);
        let mut x = if c1 > c0 { lo + (hi - lo) * (y - c0) / (c1 - c0) } else { 0.5 * (lo + hi) };
        for _ in 0..100 {
            let fx = self.eval(x)? - y;
            if fx == 0.0 {
                return Ok(x);
            }
            if fx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let g = (self.g)(x);
            let mut next = x - fx / g;
            if !(next >= lo && next <= hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }
}
