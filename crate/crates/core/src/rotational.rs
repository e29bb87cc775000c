//! Rotational SS-surfaces.
//!
//! Taking `f(z) = a z + b` and `g(z) = exp(z)` in the general representation, with
//! `z = u₁ + i u₂` and `u₂` the rotation angle, gives a surface of revolution
//! `X(u₁, u₂) = (M(u₁) cos u₂, M(u₁) sin u₂, Nz(u₁))` where
//!
//! ```text
//! M(u₁)  = e^(a u₁ + b) [ a (e^(-u₁) - e^(u₁)) / 2 + 2 e^(u₁) / (1 + e^(2u₁)) ]
//! Nz(u₁) = e^(a u₁ + b) [ (1 - e^(2u₁)) / (1 + e^(2u₁)) - a ]
//! ```
//!
//! [`Prefactor::InvNorm`] selects the profile obtained with the `h/(2|g'|)` prefactor
//! instead, whose tangential terms carry an extra factor `e^(u₁)`. That variant is not an
//! SS-surface unless `a = 0` and is kept for negative controls only.

use num_complex::Complex64;
use serde::Serialize;

use crate::expr::{BinOp, HoloExpr};
use crate::geometry::{immersion_with, GeometryError, PointJets, Prefactor, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationalParams {
    pub a: f64,
    pub b: f64,
}

/// Radial and axial coordinates of the meridian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub m: f64,
    pub nz: f64,
}

impl RotationalParams {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    /// `(f, g) = (a z + b, exp z)`.
    pub fn weierstrass_pair(&self) -> (HoloExpr, HoloExpr) {
        let f = HoloExpr::binary(
            BinOp::Add,
            HoloExpr::binary(BinOp::Mul, HoloExpr::constant(Complex64::new(self.a, 0.0)), HoloExpr::var()),
            HoloExpr::constant(Complex64::new(self.b, 0.0)),
        );
        let g = HoloExpr::apply(crate::expr::Func::Exp, HoloExpr::var());
        (f, g)
    }
}

pub fn profile(p: &RotationalParams, u1: f64) -> Profile {
    profile_with(p, u1, Prefactor::InvNormSq)
}

pub fn profile_with(p: &RotationalParams, u1: f64, prefactor: Prefactor) -> Profile {
    let e = u1.exp();
    let e2 = e * e;
    let scale = (p.a * u1 + p.b).exp();
    // tangential terms scale with |g'|^-2 = e^(-2u₁) or |g'|^-1 = e^(-u₁)
    let tangential = match prefactor {
        Prefactor::InvNormSq => 1.0 / e,
        Prefactor::InvNorm => 1.0,
    };
    Profile {
        m: scale * (p.a * (1.0 - e2) / 2.0 * tangential + 2.0 * e / (1.0 + e2)),
        nz: scale * ((1.0 - e2) / (1.0 + e2) - p.a * e * tangential),
    }
}

pub fn rotational_surface(p: &RotationalParams, u1: f64, u2: f64) -> Vec3 {
    rotational_surface_with(p, u1, u2, Prefactor::InvNormSq)
}

pub fn rotational_surface_with(p: &RotationalParams, u1: f64, u2: f64, prefactor: Prefactor) -> Vec3 {
    let Profile { m, nz } = profile_with(p, u1, prefactor);
    Vec3::new(m * u2.cos(), m * u2.sin(), nz)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub max_deviation: f64,
    pub points: usize,
}

/// Largest distance between the closed rotational formula and the general immersion with
/// `f = a z + b`, `g = exp z` over the given parameter points.
pub fn equivalence_check(
    p: &RotationalParams,
    points: &[(f64, f64)],
    prefactor: Prefactor,
) -> Result<EquivalenceReport, GeometryError> {
    let (f, g) = p.weierstrass_pair();
    let mut max_deviation = 0.0f64;
    for &(u1, u2) in points {
        let jets = PointJets::from_exprs(&f, &g, Complex64::new(u1, u2))?;
        let general = immersion_with(&jets, prefactor)?;
        let closed = rotational_surface_with(p, u1, u2, prefactor);
        max_deviation = max_deviation.max((general - closed).norm());
    }
    Ok(EquivalenceReport { max_deviation, points: points.len() })
}
