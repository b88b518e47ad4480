//! Discretization of the round sphere 𝕊ⁿ: Gauss nodes in x = cos θ, uniform longitude in
//! full mode, spectral differentiation (barycentric in x, Fourier in φ).
//!
//! Covariant derivatives are returned in the σ-orthonormal frame (e_θ, e_φ). In
//! axisymmetric mode the second slot stands for every rotational direction: the
//! Hessian of a zonal function is diagonal with entry `pp` of multiplicity n − 1.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ensure_finite};
use crate::numerics::gauss_jacobi_symmetric;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridMode {
    Axisym,
    Full,
}

/// Symmetric 2-tensor in the frame (e_θ, e_φ); see module docs for axisymmetric meaning.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SymTensor {
    pub tt: f64,
    pub tp: f64,
    pub pp: f64,
}

impl SymTensor {
    pub fn trace(&self, dim: usize) -> f64 {
        self.tt + (dim - 1) as f64 * self.pp
    }

    pub fn norm2(&self, dim: usize) -> f64 {
        self.tt * self.tt + 2.0 * self.tp * self.tp + (dim - 1) as f64 * self.pp * self.pp
    }
}

#[derive(Debug, Clone)]
pub struct Derivatives {
    pub grad: Vec<[f64; 2]>,
    pub hess: Vec<SymTensor>,
}

/// |𝕊ᵏ|.
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

#[derive(Clone)]
struct FourierPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

#[derive(Clone)]
pub struct SphereGrid {
    dim: usize,
    mode: GridMode,
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    x: Vec<f64>,
    sin: Vec<f64>,
    phi: Vec<f64>,
    /// Jacobi-weight quadrature in x (no angular factor).
    xw: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    dx: Vec<f64>,
    dxx: Vec<f64>,
    modal: Vec<f64>,
    fourier: Option<FourierPlan>,
}

impl fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereGrid")
            .field("dim", &self.dim)
            .field("mode", &self.mode)
            .field("n_theta", &self.n_theta)
            .field("n_phi", &self.n_phi)
            .finish()
    }
}

impl SphereGrid {
    /// `resolution` is the θ-node count in axisymmetric mode and the longitude count in
    /// full mode (which then uses `resolution / 2` latitude rings).
    pub fn build(dim: usize, mode: GridMode, resolution: usize) -> Result<Self> {
        match mode {
            GridMode::Axisym => Self::axisym(dim, resolution),
            GridMode::Full => {
                if dim != 2 {
                    return Err(Error::Config(format!("full grids are only supported for n = 2 (got n = {dim})")));
                }
                Self::full(resolution / 2, resolution)
            }
        }
    }

    pub fn axisym(dim: usize, n_theta: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Config(format!("sphere dimension must be ≥ 2 (got {dim})")));
        }
        if n_theta < 8 {
            return Err(Error::Config(format!("resolution must be ≥ 8 (got {n_theta})")));
        }
        Ok(Self::assemble(dim, GridMode::Axisym, n_theta, 1))
    }

    pub fn full(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 8 || n_phi < 8 {
            return Err(Error::Config(format!("resolution must be ≥ 8 (got {n_theta}×{n_phi})")));
        }
        if n_phi % 2 != 0 {
            return Err(Error::Config("longitude count must be even".into()));
        }
        Ok(Self::assemble(2, GridMode::Full, n_theta, n_phi))
    }

    fn assemble(dim: usize, mode: GridMode, n: usize, n_phi: usize) -> Self {
        let a = (dim as f64 - 2.0) / 2.0;
        let rule = gauss_jacobi_symmetric(n, a);
        // θ ascending ⇔ x descending
        let x: Vec<f64> = rule.nodes.iter().rev().copied().collect();
        let xw: Vec<f64> = rule.weights.iter().rev().copied().collect();
        let theta: Vec<f64> = x.iter().map(|v| v.acos()).collect();
        let sin: Vec<f64> = x.iter().map(|v| (1.0 - v * v).sqrt()).collect();
        let phi: Vec<f64> = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();

        let ring_factor = match mode {
            GridMode::Axisym => sphere_area(dim - 1),
            GridMode::Full => 2.0 * PI / n_phi as f64,
        };
        let mut weights = Vec::with_capacity(n * n_phi);
        for w in &xw {
            for _ in 0..n_phi {
                weights.push(w * ring_factor);
            }
        }

        let bary = barycentric_weights(&x);
        let (dx, dxx) = differentiation_matrices(&x, &bary);
        let modal = orthonormal_table(&x, &xw, a);
        let fourier = (mode == GridMode::Full).then(|| {
            let mut planner = FftPlanner::new();
            FourierPlan { forward: planner.plan_fft_forward(n_phi), inverse: planner.plan_fft_inverse(n_phi) }
        });
        Self { dim, mode, n_theta: n, n_phi, theta, x, sin, phi, xw, weights, bary, dx, dxx, modal, fourier }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// (θ, φ) of node `i`; φ = 0 in axisymmetric mode.
    pub fn node(&self, i: usize) -> (f64, f64) {
        (self.theta[i / self.n_phi], self.phi[i % self.n_phi])
    }

    pub fn ring_of(&self, i: usize) -> usize {
        i / self.n_phi
    }

    /// Unit vector of node `i` in ℝ³ (axisymmetric grids use the meridian plane φ = 0).
    pub fn direction(&self, i: usize) -> [f64; 3] {
        let (k, j) = (i / self.n_phi, i % self.n_phi);
        let s = self.sin[k];
        let p = self.phi[j];
        [s * p.cos(), s * p.sin(), self.x[k]]
    }

    pub fn area(&self) -> f64 {
        sphere_area(self.dim)
    }

    /// Sample a function of (θ, φ) at every node.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| {
            let (t, p) = self.node(i);
            f(t, p)
        }).collect()
    }

    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        self.check_len(field)?;
        ensure_finite(field, "integrand")?;
        Ok(self.integrate_unchecked(field))
    }

    pub(crate) fn integrate_unchecked(&self, field: &[f64]) -> f64 {
        self.weights.iter().zip(field).map(|(w, f)| w * f).sum()
    }

    fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.len() {
            return Err(Error::Config(format!("field has {} values, grid has {} nodes", field.len(), self.len())));
        }
        Ok(())
    }

    pub fn grad(&self, field: &[f64]) -> Result<Vec<[f64; 2]>> {
        Ok(self.derivatives(field)?.grad)
    }

    pub fn hessian(&self, field: &[f64]) -> Result<Vec<SymTensor>> {
        Ok(self.derivatives(field)?.hess)
    }

    pub fn laplace(&self, field: &[f64]) -> Result<Vec<f64>> {
        Ok(self.derivatives(field)?.hess.iter().map(|h| h.trace(self.dim)).collect())
    }

    pub fn derivatives(&self, field: &[f64]) -> Result<Derivatives> {
        self.check_len(field)?;
        ensure_finite(field, "field")?;
        Ok(match self.mode {
            GridMode::Axisym => self.derivatives_axisym(field),
            GridMode::Full => self.derivatives_full(field),
        })
    }

    fn apply(&self, mat: &[f64], f: &[f64]) -> Vec<f64> {
        let n = self.n_theta;
        par::map_indexed(n, |i| {
            let row = &mat[i * n..(i + 1) * n];
            let fi = f[i];
            row.iter().zip(f).map(|(d, fj)| d * (fj - fi)).sum()
        })
    }

    fn derivatives_axisym(&self, f: &[f64]) -> Derivatives {
        let fx = self.apply(&self.dx, f);
        let fxx = self.apply(&self.dxx, f);
        let mut grad = Vec::with_capacity(f.len());
        let mut hess = Vec::with_capacity(f.len());
        for i in 0..self.n_theta {
            let (s, x) = (self.sin[i], self.x[i]);
            grad.push([-s * fx[i], 0.0]);
            // rotational entry cot θ·f_θ = −x·f_x needs no division
            hess.push(SymTensor { tt: s * s * fxx[i] - x * fx[i], tp: 0.0, pp: -x * fx[i] });
        }
        Derivatives { grad, hess }
    }

    /// θ-derivatives (f_θ, f_θθ) of a column, respecting the pole parity of Fourier mode m.
    fn theta_column(&self, col: &[f64], odd: bool) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_theta;
        if !odd {
            let gx = self.apply(&self.dx, col);
            let gxx = self.apply(&self.dxx, col);
            let t = (0..n).map(|i| -self.sin[i] * gx[i]).collect();
            let tt = (0..n).map(|i| self.sin[i].powi(2) * gxx[i] - self.x[i] * gx[i]).collect();
            (t, tt)
        } else {
            let g: Vec<f64> = (0..n).map(|i| col[i] / self.sin[i]).collect();
            let gx = self.apply(&self.dx, &g);
            let gxx = self.apply(&self.dxx, &g);
            let mut t = Vec::with_capacity(n);
            let mut tt = Vec::with_capacity(n);
            for i in 0..n {
                let (s, x) = (self.sin[i], self.x[i]);
                let gt = -s * gx[i];
                let gtt = s * s * gxx[i] - x * gx[i];
                t.push(x * g[i] + s * gt);
                tt.push(-s * g[i] + 2.0 * x * gt + s * gtt);
            }
            (t, tt)
        }
    }

    fn signed_mode(&self, k: usize) -> i64 {
        if k <= self.n_phi / 2 { k as i64 } else { k as i64 - self.n_phi as i64 }
    }

    fn forward_rings(&self, f: &[f64]) -> Vec<Vec<Complex64>> {
        let plan = self.fourier.as_ref().expect("full grid");
        let np = self.n_phi;
        let reference = f[0];
        (0..self.n_theta)
            .map(|i| {
                let mut buf: Vec<Complex64> =
                    f[i * np..(i + 1) * np].iter().map(|v| Complex64::new(v - reference, 0.0)).collect();
                plan.forward.process(&mut buf);
                buf
            })
            .collect()
    }

    fn derivatives_full(&self, f: &[f64]) -> Derivatives {
        let plan = self.fourier.as_ref().expect("full grid");
        let (nt, np) = (self.n_theta, self.n_phi);
        let spec = self.forward_rings(f);
        let zero = Complex64::new(0.0, 0.0);
        let mut ct = vec![vec![zero; np]; nt];
        let mut ctt = vec![vec![zero; np]; nt];
        let mut cp = vec![vec![zero; np]; nt];
        let mut ctp = vec![vec![zero; np]; nt];
        let mut cpp = vec![vec![zero; np]; nt];
        for k in 0..np {
            let m = self.signed_mode(k);
            let odd = m.rem_euclid(2) == 1;
            let re: Vec<f64> = (0..nt).map(|i| spec[i][k].re).collect();
            let im: Vec<f64> = (0..nt).map(|i| spec[i][k].im).collect();
            let (re_t, re_tt) = self.theta_column(&re, odd);
            let (im_t, im_tt) = self.theta_column(&im, odd);
            let nyquist = 2 * k == np;
            let mf = m as f64;
            for i in 0..nt {
                let c = spec[i][k];
                let c_t = Complex64::new(re_t[i], im_t[i]);
                ct[i][k] = c_t;
                ctt[i][k] = Complex64::new(re_tt[i], im_tt[i]);
                if !nyquist {
                    cp[i][k] = Complex64::new(0.0, mf) * c;
                    ctp[i][k] = Complex64::new(0.0, mf) * c_t;
                }
                cpp[i][k] = -mf * mf * c;
            }
        }
        let scale = 1.0 / np as f64;
        let inverse = |rows: &mut Vec<Vec<Complex64>>| -> Vec<f64> {
            let mut out = Vec::with_capacity(nt * np);
            for row in rows.iter_mut() {
                plan.inverse.process(row);
                out.extend(row.iter().map(|c| c.re * scale));
            }
            out
        };
        let (ft, ftt, fp, ftp, fpp) =
            (inverse(&mut ct), inverse(&mut ctt), inverse(&mut cp), inverse(&mut ctp), inverse(&mut cpp));
        let mut grad = Vec::with_capacity(nt * np);
        let mut hess = Vec::with_capacity(nt * np);
        for i in 0..nt {
            let (s, x) = (self.sin[i], self.x[i]);
            let cot = x / s;
            for j in 0..np {
                let q = i * np + j;
                grad.push([ft[q], fp[q] / s]);
                hess.push(SymTensor {
                    tt: ftt[q],
                    tp: (ftp[q] - cot * fp[q]) / s,
                    pp: fpp[q] / (s * s) + cot * ft[q],
                });
            }
        }
        Derivatives { grad, hess }
    }

    fn bary_eval(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, (&xk, &vk)) in self.x.iter().zip(&self.bary).enumerate() {
            let d = x - xk;
            if d == 0.0 {
                return values[k];
            }
            let c = vk / d;
            num += c * values[k];
            den += c;
        }
        num / den
    }

    /// Spectral interpolation of a zonal field (axisymmetric grids) at polar angle θ.
    pub fn interpolate_theta(&self, field: &[f64], theta: f64) -> Result<f64> {
        if self.mode != GridMode::Axisym {
            return Err(Error::Config("interpolate_theta needs an axisymmetric grid".into()));
        }
        self.check_len(field)?;
        Ok(self.bary_eval(field, theta.cos()))
    }

    /// Spectral interpolation at (θ, φ); φ is ignored on axisymmetric grids.
    pub fn interpolate(&self, field: &[f64], theta: f64, phi: f64) -> Result<f64> {
        match self.mode {
            GridMode::Axisym => self.interpolate_theta(field, theta),
            GridMode::Full => {
                self.check_len(field)?;
                Ok(self.interpolator(field).eval(theta, phi))
            }
        }
    }

    /// Precomputed Fourier data for repeated interpolation of one field.
    pub fn interpolator<'a>(&'a self, field: &[f64]) -> Interpolator<'a> {
        let spec = match self.mode {
            GridMode::Full => {
                let s = self.forward_rings(field);
                let nt = self.n_theta;
                let cols = (0..self.n_phi)
                    .map(|k| {
                        let odd = self.signed_mode(k).rem_euclid(2) == 1;
                        let div = |i: usize| if odd { self.sin[i] } else { 1.0 };
                        let re: Vec<f64> = (0..nt).map(|i| s[i][k].re / div(i)).collect();
                        let im: Vec<f64> = (0..nt).map(|i| s[i][k].im / div(i)).collect();
                        (re, im, odd)
                    })
                    .collect();
                Some(cols)
            }
            GridMode::Axisym => None,
        };
        Interpolator { grid: self, values: field.to_vec(), reference: field[0], spec }
    }

    /// Orthonormal (Jacobi/Legendre) coefficients of a zonal field, low degree first.
    pub fn zonal_coefficients(&self, field: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_theta;
        let column: Vec<f64> = match self.mode {
            GridMode::Axisym => {
                self.check_len(field)?;
                field.to_vec()
            }
            GridMode::Full => {
                self.check_len(field)?;
                (0..n).map(|i| field[i * self.n_phi..(i + 1) * self.n_phi].iter().sum::<f64>() / self.n_phi as f64).collect()
            }
        };
        Ok((0..n)
            .map(|l| {
                let q = &self.modal[l * n..(l + 1) * n];
                (0..n).map(|j| self.xw[j] * column[j] * q[j]).sum()
            })
            .collect())
    }

    /// Energy of the field above the fraction `frac` of the resolved band, and its total energy.
    pub fn spectral_tail(&self, field: &[f64], frac: f64) -> Result<(f64, f64)> {
        let coeffs = self.zonal_coefficients(field)?;
        let cut = ((frac * self.n_theta as f64).ceil() as usize).min(self.n_theta);
        let mut tail: f64 = coeffs[cut..].iter().map(|c| c * c).sum();
        let mut total: f64 = coeffs.iter().map(|c| c * c).sum();
        if self.mode == GridMode::Full {
            let spec = self.forward_rings(field);
            let mcut = (frac * (self.n_phi / 2) as f64).ceil() as i64;
            let norm = 1.0 / (self.n_phi as f64).powi(2);
            for (i, row) in spec.iter().enumerate() {
                for (k, c) in row.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let e = self.xw[i] * c.norm_sqr() * norm;
                    total += e;
                    if self.signed_mode(k).abs() >= mcut {
                        tail += e;
                    }
                }
            }
        }
        Ok((tail.sqrt(), total.sqrt()))
    }
}

pub struct Interpolator<'a> {
    grid: &'a SphereGrid,
    values: Vec<f64>,
    reference: f64,
    spec: Option<Vec<(Vec<f64>, Vec<f64>, bool)>>,
}

impl Interpolator<'_> {
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        let g = self.grid;
        let Some(cols) = &self.spec else {
            return g.bary_eval(&self.values, theta.cos());
        };
        let x = theta.cos();
        let s = theta.sin();
        let np = g.n_phi;
        let mut acc = 0.0;
        for (k, (re, im, odd)) in cols.iter().enumerate() {
            let m = g.signed_mode(k) as f64;
            let factor = if *odd { s } else { 1.0 };
            let cr = g.bary_eval(re, x) * factor;
            let ci = g.bary_eval(im, x) * factor;
            let (sn, cs) = (m * phi).sin_cos();
            acc += cr * cs - ci * sn;
        }
        self.reference + acc / np as f64
    }
}

fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let logs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let mut l = 0.0;
            let mut sign = 1.0;
            for k in 0..n {
                if k != j {
                    let d = x[j] - x[k];
                    l += d.abs().ln();
                    if d < 0.0 {
                        sign = -sign;
                    }
                }
            }
            (-l, sign)
        })
        .collect();
    let lmax = logs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    logs.iter().map(|(l, s)| s * (l - lmax).exp()).collect()
}

fn differentiation_matrices(x: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let e = (v[j] / v[i]) / (x[i] - x[j]);
                d[i * n + j] = e;
                diag -= e;
            }
        }
        d[i * n + i] = diag;
    }
    let mut d2 = vec![0.0; n * n];
    for i in 0..n {
        let dii = d[i * n + i];
        for j in 0..n {
            if i != j {
                d2[i * n + j] = 2.0 * d[i * n + j] * (dii - 1.0 / (x[i] - x[j]));
            }
        }
    }
    // Diagonals are never read: derivatives are applied in the form Σ_j D_ij (f_j − f_i).
    (d, d2)
}

/// Discrete-orthonormal symmetric Jacobi polynomials q_l(x_j), row-major by degree.
fn orthonormal_table(x: &[f64], w: &[f64], a: f64) -> Vec<f64> {
    let n = x.len();
    let mut p = vec![0.0; n * n];
    for (j, &xj) in x.iter().enumerate() {
        let mut p0 = 1.0;
        p[j] = p0;
        if n > 1 {
            let mut p1 = (a + 1.0) * xj;
            p[n + j] = p1;
            for k in 2..n {
                let kf = k as f64;
                let c = 2.0 * kf + 2.0 * a;
                let p2 = ((c - 1.0) * c * (c - 2.0) * xj * p1 - 2.0 * (kf + a - 1.0).powi(2) * c * p0)
                    / (2.0 * kf * (kf + 2.0 * a) * (c - 2.0));
                p0 = p1;
                p1 = p2;
                p[k * n + j] = p1;
            }
        }
    }
    for l in 0..n {
        let row = &mut p[l * n..(l + 1) * n];
        let h: f64 = row.iter().zip(w).map(|(q, wj)| wj * q * q).sum();
        let s = 1.0 / h.sqrt();
        row.iter_mut().for_each(|q| *q *= s);
    }
    p
}
