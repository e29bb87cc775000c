//! Closed-form differential geometry of the surfaces generated by a pair of holomorphic
//! functions `(f, g)`.
//!
//! The Gauss map is the inverse stereographic image of `g`,
//! `N = (2g, 2 - T) / T` with `T = 1 + |g|²`, and the support function is
//! `h = exp(Re f)`. The surface is recovered from its support function as
//! `X = Σⱼ (h,ⱼ / Lⱼⱼ) N,ⱼ + h N`, where `L = 4|g'|²/T² · Id` is the (conformal) metric
//! induced by `N`. Its tangent vectors are `X,ᵢ = Σⱼ Vᵢⱼ N,ⱼ`, so the symmetric matrix `V`
//! is the inverse of the Weingarten matrix and every curvature quantity follows from it.
//!
//! Second fundamental form coefficients are reported with the convention
//! `II = ⟨X,ᵢ, N,ⱼ⟩ = Vᵢⱼ Lⱼⱼ`, which is the negative of `⟨X,ᵢⱼ, N⟩`.

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, HoloExpr};
use crate::jet::{inner, Jet2, I};

pub type Vec3 = Vector3<f64>;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("g' vanishes at z = {0}")]
    SingularGaussMap(Complex64),
    #[error("regularity failure: detV = 0")]
    NotRegular,
    #[error("non-finite value at z = {0}")]
    NonFinite(Complex64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Which scalar multiplies the tangential part of the immersion formula.
///
/// Only [`Prefactor::InvNormSq`] yields a surface whose normal is the prescribed Gauss map;
/// [`Prefactor::InvNorm`] exists as a negative control for the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Prefactor {
    /// `h / (2|g'|²)`
    #[default]
    InvNormSq,
    /// `h / (2|g'|)`
    InvNorm,
}

/// Jets of `f` and `g` at the parameter `z = u₁ + i u₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointJets {
    pub z: Complex64,
    pub f: Jet2,
    pub g: Jet2,
}

impl PointJets {
    pub fn new(z: Complex64, f: Jet2, g: Jet2) -> Self {
        Self { z, f, g }
    }

    pub fn from_exprs(f: &HoloExpr, g: &HoloExpr, z: Complex64) -> Result<Self, EvalError> {
        Ok(Self::new(z, f.eval_jet(z)?, g.eval_jet(z)?))
    }

    fn check(&self) -> Result<(), GeometryError> {
        if !(self.f.is_finite() && self.g.is_finite()) {
            return Err(GeometryError::NonFinite(self.z));
        }
        if self.g.d1.norm_sqr() == 0.0 {
            return Err(GeometryError::SingularGaussMap(self.z));
        }
        Ok(())
    }
}

/// Scalars shared by all closed forms at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomScalars {
    /// `1 + |g|²`
    pub t: f64,
    /// support function `exp(Re f)`
    pub h: f64,
    /// `ξ = f'(g''/g' - 2 g' conj(g) / T) - f''`
    pub xi: Complex64,
    /// conformal factor `L₁₁ = L₂₂ = 4|g'|²/T²`
    pub l: f64,
}

impl GeomScalars {
    pub fn new(p: &PointJets) -> Result<Self, GeometryError> {
        p.check()?;
        let g = p.g;
        let t = 1.0 + g.v.norm_sqr();
        let h = p.f.v.re.exp();
        let xi = p.f.d1 * (g.d2 / g.d1 - 2.0 / t * g.d1 * g.v.conj()) - p.f.d2;
        let l = 4.0 * g.d1.norm_sqr() / (t * t);
        Ok(Self { t, h, xi, l })
    }

    /// `T²h / (4|g'|²) = h / L`
    fn scale(&self) -> f64 {
        self.h / self.l
    }
}

/// Symmetric 2×2 matrix with `X,ᵢ = Σⱼ Vᵢⱼ N,ⱼ`; its inverse is the Weingarten matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VMatrix {
    pub v11: f64,
    pub v12: f64,
    pub v22: f64,
}

impl VMatrix {
    pub fn new(v11: f64, v12: f64, v22: f64) -> Self {
        Self { v11, v12, v22 }
    }

    pub fn trace(&self) -> f64 {
        self.v11 + self.v22
    }

    pub fn det(&self) -> f64 {
        self.v11 * self.v22 - self.v12 * self.v12
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.v11,
            (1, 1) => self.v22,
            _ => self.v12,
        }
    }

    /// `W = V⁻¹`, as `[[w11, w12], [w21, w22]]`.
    pub fn weingarten(&self) -> Result<[[f64; 2]; 2], GeometryError> {
        let d = self.det();
        if d == 0.0 {
            return Err(GeometryError::NotRegular);
        }
        Ok([[self.v22 / d, -self.v12 / d], [-self.v12 / d, self.v11 / d]])
    }

    /// Frobenius norm of the difference, relative to the norm of `self`.
    pub fn relative_deviation(&self, other: &VMatrix) -> f64 {
        let diff = (self.v11 - other.v11).powi(2)
            + 2.0 * (self.v12 - other.v12).powi(2)
            + (self.v22 - other.v22).powi(2);
        let norm = self.v11.powi(2) + 2.0 * self.v12.powi(2) + self.v22.powi(2);
        (diff / norm).sqrt()
    }

    /// `(H, K)` with `K = 1/detV` and `H = -trV / (2 detV)`.
    pub fn curvatures(&self) -> Result<(f64, f64), GeometryError> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(GeometryError::NotRegular);
        }
        Ok((-self.trace() / (2.0 * d), 1.0 / d))
    }
}

/// Christoffel symbols `Γᵏᵢⱼ` of the metric `L`; field `sK_IJ` holds `Γᴷᵢⱼ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel {
    pub s1_11: f64,
    pub s2_11: f64,
    pub s1_22: f64,
    pub s2_22: f64,
    pub s1_12: f64,
    pub s2_12: f64,
}

impl Christoffel {
    /// `Γᵏᵢⱼ` with zero-based indices.
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        match (k, i.min(j), i.max(j)) {
            (0, 0, 0) => self.s1_11,
            (1, 0, 0) => self.s2_11,
            (0, 1, 1) => self.s1_22,
            (1, 1, 1) => self.s2_22,
            (0, 0, 1) => self.s1_12,
            _ => self.s2_12,
        }
    }
}

pub fn christoffel(g: &Jet2) -> Result<Christoffel, GeometryError> {
    let gp2 = g.d1.norm_sqr();
    if gp2 == 0.0 {
        return Err(GeometryError::SingularGaussMap(g.v));
    }
    let t = 1.0 + g.v.norm_sqr();
    let s1_11 = (t * inner(g.d1, g.d2) - 2.0 * gp2 * inner(g.v, g.d1)) / (t * gp2);
    let s2_22 = (t * inner(g.d1, I * g.d2) - 2.0 * gp2 * inner(g.v, I * g.d1)) / (t * gp2);
    Ok(Christoffel { s1_11, s2_11: -s2_22, s1_22: -s1_11, s2_22, s1_12: s2_22, s2_12: s1_11 })
}

pub fn gauss_map(g: &Jet2) -> Vec3 {
    let t = 1.0 + g.v.norm_sqr();
    Vec3::new(2.0 * g.v.re, 2.0 * g.v.im, 2.0 - t) / t
}

/// `[N,₁, N,₂]` in closed form.
pub fn gauss_map_partials(g: &Jet2) -> [Vec3; 2] {
    let t = 1.0 + g.v.norm_sqr();
    let k = 2.0 / (t * t);
    [g.d1, I * g.d1].map(|gi| {
        let tg = inner(g.v, gi);
        let w = t * gi - 2.0 * g.v * tg;
        k * Vec3::new(w.re, w.im, -2.0 * tg)
    })
}

/// A scalar field on the parameter domain together with its first and second partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportDerivs {
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    pub h11: f64,
    pub h12: f64,
    pub h22: f64,
}

impl SupportDerivs {
    /// Partials of `h = exp(Re f)` read off the jet of `f`.
    pub fn from_f(f: &Jet2) -> Self {
        let h = f.v.re.exp();
        let a = f.d1.re;
        let b = inner(ONE, I * f.d1);
        Self {
            h,
            h1: h * a,
            h2: h * b,
            h11: h * (a * a + f.d2.re),
            h12: h * (a * b + inner(ONE, I * f.d2)),
            h22: h * (b * b - f.d2.re),
        }
    }

    pub fn constant(h: f64) -> Self {
        Self { h, h1: 0.0, h2: 0.0, h11: 0.0, h12: 0.0, h22: 0.0 }
    }

    /// Central-difference partials of an arbitrary scalar field.
    pub fn from_fn(field: impl Fn(f64, f64) -> f64, u1: f64, u2: f64, step: f64) -> Self {
        let d = step;
        let c = field(u1, u2);
        let (p1, m1) = (field(u1 + d, u2), field(u1 - d, u2));
        let (p2, m2) = (field(u1, u2 + d), field(u1, u2 - d));
        let cross = field(u1 + d, u2 + d) - field(u1 + d, u2 - d) - field(u1 - d, u2 + d)
            + field(u1 - d, u2 - d);
        Self {
            h: c,
            h1: (p1 - m1) / (2.0 * d),
            h2: (p2 - m2) / (2.0 * d),
            h11: (p1 - 2.0 * c + m1) / (d * d),
            h12: cross / (4.0 * d * d),
            h22: (p2 - 2.0 * c + m2) / (d * d),
        }
    }

    fn grad(&self) -> [f64; 2] {
        [self.h1, self.h2]
    }

    fn hess(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.h11,
            (1, 1) => self.h22,
            _ => self.h12,
        }
    }
}

/// `V` from the closed-form entries in terms of `f'`, `ξ` and `h`.
pub fn compute_v_closed(p: &PointJets) -> Result<VMatrix, GeometryError> {
    let s = GeomScalars::new(p)?;
    let c = s.scale();
    let fp = p.f.d1;
    let a = inner(ONE, fp);
    let b = inner(ONE, I * fp);
    let xr = inner(ONE, s.xi);
    Ok(VMatrix::new(
        c * (a * a - xr) + s.h,
        c * inner(I, s.xi - fp * fp / 2.0),
        c * (b * b + xr) + s.h,
    ))
}

/// `Vᵢⱼ = (h,ᵢⱼ - Σₖ h,ₖ Γᵏᵢⱼ) / Lⱼⱼ + h δᵢⱼ` from the partials of `h` and the
/// Christoffel symbols of `L`.
pub fn compute_v_direct(p: &PointJets, h: &SupportDerivs) -> Result<VMatrix, GeometryError> {
    p.check()?;
    let gamma = christoffel(&p.g)?;
    let t = 1.0 + p.g.v.norm_sqr();
    let l = 4.0 * p.g.d1.norm_sqr() / (t * t);
    let grad = h.grad();
    let entry = |i: usize, j: usize| {
        let conn: f64 = (0..2).map(|k| grad[k] * gamma.gamma(k, i, j)).sum();
        let diag = if i == j { h.h } else { 0.0 };
        (h.hess(i, j) - conn) / l + diag
    };
    Ok(VMatrix::new(entry(0, 0), entry(0, 1), entry(1, 1)))
}

/// The immersion in closed form.
pub fn immersion(p: &PointJets) -> Result<Vec3, GeometryError> {
    immersion_with(p, Prefactor::InvNormSq)
}

pub fn immersion_with(p: &PointJets, prefactor: Prefactor) -> Result<Vec3, GeometryError> {
    p.check()?;
    let (f, g) = (p.f, p.g);
    let t = 1.0 + g.v.norm_sqr();
    let h = f.v.re.exp();
    let gp2 = g.d1.norm_sqr();
    let denom = match prefactor {
        Prefactor::InvNormSq => 2.0 * gp2,
        Prefactor::InvNorm => 2.0 * gp2.sqrt(),
    };
    let k = h / denom;
    let m = inner(g.d1, g.v * f.d1);
    let w = t * g.d1 * f.d1.conj() - 2.0 * g.v * m;
    let tangential = k * Vec3::new(w.re, w.im, -2.0 * m);
    Ok(tangential + h * gauss_map(&g))
}

/// `X = ∇_L h + h N` for an arbitrary support function `h` given by its partials.
pub fn support_representation(h: &SupportDerivs, g: &Jet2) -> Result<Vec3, GeometryError> {
    let gp2 = g.d1.norm_sqr();
    if gp2 == 0.0 {
        return Err(GeometryError::SingularGaussMap(g.v));
    }
    let t = 1.0 + g.v.norm_sqr();
    let l = 4.0 * gp2 / (t * t);
    let [n1, n2] = gauss_map_partials(g);
    Ok(n1 * (h.h1 / l) + n2 * (h.h2 / l) + gauss_map(g) * h.h)
}

/// Coefficients of the three fundamental forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FundamentalForms {
    /// E = ⟨X,₁, X,₁⟩
    pub e1: f64,
    /// F = ⟨X,₁, X,₂⟩
    pub f1: f64,
    /// G = ⟨X,₂, X,₂⟩
    pub g1: f64,
    /// ⟨X,₁, N,₁⟩
    pub e2: f64,
    /// ⟨X,₁, N,₂⟩
    pub f2: f64,
    /// ⟨X,₂, N,₂⟩
    pub g2: f64,
    /// III = l · Id
    pub l: f64,
}

impl FundamentalForms {
    /// `I = V L Vᵀ`, `II = V L`, `III = L`.
    pub fn from_v(v: &VMatrix, l: f64) -> Self {
        Self {
            e1: (v.v11 * v.v11 + v.v12 * v.v12) * l,
            f1: (v.v11 + v.v22) * v.v12 * l,
            g1: (v.v22 * v.v22 + v.v12 * v.v12) * l,
            e2: v.v11 * l,
            f2: v.v12 * l,
            g2: v.v22 * l,
            l,
        }
    }

    /// Largest deviation, with first-form entries scaled by `E + G` and second-form
    /// entries by `|e| + |g|`.
    pub fn relative_deviation(&self, other: &FundamentalForms) -> f64 {
        let s1 = self.e1 + self.g1;
        let s2 = self.e2.abs() + self.g2.abs();
        [
            (self.e1 - other.e1).abs() / s1,
            (self.f1 - other.f1).abs() / s1,
            (self.g1 - other.g1).abs() / s1,
            (self.e2 - other.e2).abs() / s2,
            (self.f2 - other.f2).abs() / s2,
            (self.g2 - other.g2).abs() / s2,
            (self.l - other.l).abs() / self.l,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Fundamental forms from their explicit expressions in `f'`, `ξ`, `h` and `g'`.
pub fn fundamental_forms(p: &PointJets) -> Result<FundamentalForms, GeometryError> {
    let s = GeomScalars::new(p)?;
    let fp = p.f.d1;
    let (h, l) = (s.h, s.l);
    let c = s.scale() * h; // T²h²/(4|g'|²)
    let a = inner(ONE, fp).powi(2) - inner(ONE, s.xi);
    let b = inner(ONE, I * fp).powi(2) + inner(ONE, s.xi);
    let y = inner(I, s.xi - fp * fp / 2.0);
    Ok(FundamentalForms {
        e1: c * (a * a + y * y) + 2.0 * h * h * a + h * h * l,
        f1: (c * fp.norm_sqr() + 2.0 * h * h) * y,
        g1: c * (b * b + y * y) + 2.0 * h * h * b + h * h * l,
        e2: h * a + h * l,
        f2: h * y,
        g2: h * b + h * l,
        l,
    })
}

/// Normalized residual of `2ψH + (Λ + ψ²)K = 0`.
pub fn ss_relation_residual(psi: f64, lambda: f64, mean: f64, gauss: f64) -> f64 {
    let a = 2.0 * psi * mean;
    let b = (lambda + psi * psi) * gauss;
    (a + b).abs() / (1.0 + a.abs() + b.abs())
}

/// Everything known about the surface at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceEval {
    pub u: [f64; 2],
    pub x: [f64; 3],
    pub n: [f64; 3],
    pub forms: FundamentalForms,
    pub v: VMatrix,
    pub mean_curvature: f64,
    pub gauss_curvature: f64,
    /// ⟨X, N⟩
    pub psi: f64,
    /// ⟨X, X⟩
    pub lambda: f64,
    /// `exp(Re f)`
    pub support: f64,
    pub g_prime_norm: f64,
    pub ss_residual: f64,
    pub midsphere_residual: f64,
}

impl SurfaceEval {
    pub fn new(p: &PointJets) -> Result<Self, GeometryError> {
        Self::with_prefactor(p, Prefactor::InvNormSq)
    }

    pub fn with_prefactor(p: &PointJets, prefactor: Prefactor) -> Result<Self, GeometryError> {
        let s = GeomScalars::new(p)?;
        let x = immersion_with(p, prefactor)?;
        let n = gauss_map(&p.g);
        let v = compute_v_closed(p)?;
        let (mean, gauss) = v.curvatures()?;
        let psi = x.dot(&n);
        let lambda = x.dot(&x);
        let mut eval = Self {
            u: [p.z.re, p.z.im],
            x: x.into(),
            n: n.into(),
            forms: FundamentalForms::from_v(&v, s.l),
            v,
            mean_curvature: mean,
            gauss_curvature: gauss,
            psi,
            lambda,
            support: s.h,
            g_prime_norm: p.g.d1.norm(),
            ss_residual: 0.0,
            midsphere_residual: 0.0,
        };
        eval.ss_residual = ss_residual(&eval);
        eval.midsphere_residual = midsphere_residual(&eval)?;
        if !eval.is_finite() {
            return Err(GeometryError::NonFinite(p.z));
        }
        Ok(eval)
    }

    pub fn position(&self) -> Vec3 {
        Vec3::from(self.x)
    }

    pub fn normal(&self) -> Vec3 {
        Vec3::from(self.n)
    }

    fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.n).all(|c| c.is_finite())
            && self.mean_curvature.is_finite()
            && self.gauss_curvature.is_finite()
            && self.ss_residual.is_finite()
            && self.midsphere_residual.is_finite()
    }
}

pub fn ss_residual(s: &SurfaceEval) -> f64 {
    ss_relation_residual(s.psi, s.lambda, s.mean_curvature, s.gauss_curvature)
}

/// Radius of the sphere tangent at the point that passes through the origin: `-Λ/(2ψ)`.
pub fn radius_function(s: &SurfaceEval) -> f64 {
    -s.lambda / (2.0 * s.psi)
}

/// `||X + rN|² - r²| / (1 + Λ)` with `r = H/K + ψ/2`; zero exactly when the sphere with
/// center `X + rN` and radius `r` passes through the origin.
pub fn midsphere_residual(s: &SurfaceEval) -> Result<f64, GeometryError> {
    if s.gauss_curvature == 0.0 || s.psi == 0.0 {
        return Err(GeometryError::NotRegular);
    }
    let r = s.mean_curvature / s.gauss_curvature + s.psi / 2.0;
    let center = s.position() + s.normal() * r;
    Ok((center.norm_squared() - r * r).abs() / (1.0 + s.lambda))
}

/// The three candidate closed forms for `detV` next to the product `V₁₁V₂₂ - V₁₂²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetVVariants {
    /// `V₁₁V₂₂ - V₁₂²` from the closed entries (the value used everywhere else)
    pub product: f64,
    /// leading factor `T⁴h²/(4|g'|²)` applied to the whole bracket
    pub printed: f64,
    /// leading factor `T⁴h²/(16|g'|⁴)` applied to the whole bracket
    pub corrected_prefactor: f64,
    /// `c²[…] + c h |f'|² + h²` with `c = T²h/(4|g'|²)`, expanded from the entries
    pub expanded: f64,
}

pub fn det_v_variants(p: &PointJets) -> Result<DetVVariants, GeometryError> {
    let s = GeomScalars::new(p)?;
    let v = compute_v_closed(p)?;
    let fp = p.f.d1;
    let fp2 = fp * fp;
    let gp2 = p.g.d1.norm_sqr();
    let (t, h) = (s.t, s.h);
    let core = inner(I, fp2 / 2.0).powi(2) - inner(I, s.xi - fp2 / 2.0).powi(2)
        + inner(ONE, s.xi) * inner(ONE, fp2 - s.xi);
    let bracket = core + fp.norm_sqr() / (t * t);
    let t4h2 = t.powi(4) * h * h;
    let c = s.scale();
    Ok(DetVVariants {
        product: v.det(),
        printed: t4h2 / (4.0 * gp2) * bracket + h * h,
        corrected_prefactor: t4h2 / (16.0 * gp2 * gp2) * bracket + h * h,
        expanded: c * c * core + c * h * fp.norm_sqr() + h * h,
    })
}

/// Step used by the harmonicity stencils; a power of two keeps quadratic fields exact.
const HARMONIC_STEP: f64 = 1.0 / 1024.0;

/// `(hΔh - |∇h|²) / h²` by Richardson-extrapolated central differences of `h`.
///
/// The numerator vanishes exactly when `log h` is harmonic.
pub fn harmonicity_residual_field(h: impl Fn(f64, f64) -> f64, u1: f64, u2: f64) -> f64 {
    let stencil = |d: f64| {
        let c = h(u1, u2);
        let (p1, m1, p2, m2) = (h(u1 + d, u2), h(u1 - d, u2), h(u1, u2 + d), h(u1, u2 - d));
        let lap = (p1 + m1 + p2 + m2 - 4.0 * c) / (d * d);
        let g1 = (p1 - m1) / (2.0 * d);
        let g2 = (p2 - m2) / (2.0 * d);
        (c, lap, g1, g2)
    };
    let (c, lap_a, g1_a, g2_a) = stencil(HARMONIC_STEP);
    let (_, lap_b, g1_b, g2_b) = stencil(HARMONIC_STEP / 2.0);
    let rich = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;
    let lap = rich(lap_a, lap_b);
    let (g1, g2) = (rich(g1_a, g1_b), rich(g2_a, g2_b));
    ((c * lap - g1 * g1 - g2 * g2) / (c * c)).abs()
}

/// Harmonicity residual of `h = exp(Re f)`.
pub fn harmonicity_residual(f: &HoloExpr, z: Complex64) -> Result<f64, EvalError> {
    // surface any domain error at the center point first
    f.eval(z)?;
    let h = |u1: f64, u2: f64| f.eval(Complex64::new(u1, u2)).map_or(f64::NAN, |w| w.re.exp());
    Ok(harmonicity_residual_field(h, z.re, z.im))
}
