//! Second-order jets of holomorphic functions.
//!
//! A [`Jet2`] carries `(F(z), F'(z), F''(z))` for some holomorphic `F`. Arithmetic and the
//! elementary functions below propagate all three components with the sum, product,
//! quotient and chain rules, so evaluating an expression once yields its value together
//! with both complex derivatives.
//!
//! Because every jet describes a holomorphic function, the real-coordinate partials are
//! recovered as `∂/∂u₁ = d/dz` and `∂/∂u₂ = i·d/dz` for `z = u₁ + i·u₂`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Euclidean pairing of two complex numbers seen as plane vectors: `Re(a·conj(b))`.
///
/// `inner(1, w) = Re w` and `inner(i, w) = Im w`.
#[inline]
pub fn inner(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

/// The imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum JetError {
    #[error("division by a function vanishing at this point (divisor value {0})")]
    DivisionByZero(Complex64),
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("negative power {0} of a function vanishing at this point")]
    NegativePowerOfZero(i32),
}

/// Value, first and second complex derivative of a holomorphic function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl Jet2 {
    pub const fn new(v: Complex64, d1: Complex64, d2: Complex64) -> Self {
        Self { v, d1, d2 }
    }

    pub const fn constant(c: Complex64) -> Self {
        Self::new(c, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// The jet of the identity map `z ↦ z` at `z0`.
    pub const fn variable(z0: Complex64) -> Self {
        Self::new(z0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Composes an outer function with value/derivatives `(F, F', F'')` evaluated at
    /// `self.v` with the inner jet.
    fn compose(&self, f0: Complex64, f1: Complex64, f2: Complex64) -> Self {
        Self::new(f0, f1 * self.d1, f2 * self.d1 * self.d1 + f1 * self.d2)
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, JetError> {
        if rhs.v.norm_sqr() == 0.0 {
            return Err(JetError::DivisionByZero(rhs.v));
        }
        let q = self.v / rhs.v;
        let d1 = (self.d1 - q * rhs.d1) / rhs.v;
        let d2 = (self.d2 - 2.0 * d1 * rhs.d1 - q * rhs.d2) / rhs.v;
        Ok(Self::new(q, d1, d2))
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    pub fn sin(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.compose(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.compose(c, -s, -c)
    }

    /// Principal branch; the cut runs along the negative real axis.
    pub fn ln(self) -> Result<Self, JetError> {
        if self.v.norm_sqr() == 0.0 {
            return Err(JetError::LogOfZero);
        }
        let r = self.v.inv();
        Ok(self.compose(self.v.ln(), r, -r * r))
    }

    /// Integer power by repeated squaring on jets, so `z^n` stays exact and branch-free.
    pub fn powi(self, n: i32) -> Result<Self, JetError> {
        if n < 0 {
            if self.v.norm_sqr() == 0.0 {
                return Err(JetError::NegativePowerOfZero(n));
            }
            let pos = self.powi_unsigned(n.unsigned_abs());
            return Self::constant(Complex64::new(1.0, 0.0)).checked_div(pos);
        }
        Ok(self.powi_unsigned(n as u32))
    }

    fn powi_unsigned(self, mut n: u32) -> Self {
        let mut acc = Self::constant(Complex64::new(1.0, 0.0));
        let mut base = self;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            n >>= 1;
            if n > 0 {
                base = base * base;
            }
        }
        acc
    }

    /// General power `self^exponent = exp(exponent·log self)` on the principal branch.
    pub fn pow(self, exponent: Self) -> Result<Self, JetError> {
        Ok((exponent * self.ln()?).exp())
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.v + rhs.v, self.d1 + rhs.d1, self.d2 + rhs.d2)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.v - rhs.v, self.d1 - rhs.d1, self.d2 - rhs.d2)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.v * rhs.v,
            self.d1 * rhs.v + self.v * rhs.d1,
            self.d2 * rhs.v + 2.0 * self.d1 * rhs.d1 + self.v * rhs.d2,
        )
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Self {
        Self::new(-self.v, -self.d1, -self.d2)
    }
}
