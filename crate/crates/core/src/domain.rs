//! Parameter domains and their sampling grids.
//!
//! Textual form (used by the CLI `--domain` flag and config files):
//!
//! ```text
//! rect:U1MIN,U1MAX,U2MIN,U2MAX            closed in both directions
//! rect:U1MIN,U1MAX,U2MIN,U2MAX,periodic   u₂ half-open, cells wrap around
//! annulus:RMIN,RMAX                       full turn, cells wrap around
//! annulus:RMIN,RMAX,TMIN,TMAX             sector, closed
//! ```
//!
//! Numbers may also be written as `pi`, `tau` or their negatives.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("malformed domain `{0}`: {1}")]
    Syntax(String, String),
    #[error("invalid domain: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Rectangle { u1: [f64; 2], u2: [f64; 2], periodic: bool },
    Annulus { r: [f64; 2], theta: [f64; 2], periodic: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// grid resolution along the first (u₁ or r) and second (u₂ or θ) axis
    pub nu: [usize; 2],
    pub mask_gprime: f64,
    pub mask_detv: f64,
}

pub const DEFAULT_MASK_GPRIME: f64 = 1e-8;
pub const DEFAULT_MASK_DETV: f64 = 1e-10;

impl DomainSpec {
    pub fn new(kind: DomainKind, nu: [usize; 2]) -> Result<Self, DomainError> {
        let spec = Self { kind, nu, mask_gprime: DEFAULT_MASK_GPRIME, mask_detv: DEFAULT_MASK_DETV };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rectangle(u1: [f64; 2], u2: [f64; 2], periodic: bool, n: usize) -> Result<Self, DomainError> {
        Self::new(DomainKind::Rectangle { u1, u2, periodic }, [n, n])
    }

    pub fn annulus(r_min: f64, r_max: f64, n: usize) -> Result<Self, DomainError> {
        Self::new(DomainKind::Annulus { r: [r_min, r_max], theta: [0.0, TAU], periodic: true }, [n, n])
    }

    pub fn with_masks(mut self, mask_gprime: f64, mask_detv: f64) -> Result<Self, DomainError> {
        self.mask_gprime = mask_gprime;
        self.mask_detv = mask_detv;
        self.validate()?;
        Ok(self)
    }

    pub fn with_resolution(mut self, nu: [usize; 2]) -> Result<Self, DomainError> {
        self.nu = nu;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let ordered = |[lo, hi]: [f64; 2]| lo.is_finite() && hi.is_finite() && lo < hi;
        match self.kind {
            DomainKind::Rectangle { u1, u2, .. } => {
                if !ordered(u1) || !ordered(u2) {
                    return Err(DomainError::Invalid("rectangle bounds must be finite and increasing".into()));
                }
            }
            DomainKind::Annulus { r, theta, .. } => {
                if !(r[0] > 0.0) {
                    return Err(DomainError::Invalid("annulus needs r_min > 0".into()));
                }
                if !ordered(r) || !ordered(theta) {
                    return Err(DomainError::Invalid("annulus bounds must be finite and increasing".into()));
                }
            }
        }
        if self.nu.iter().any(|&n| n < 2) {
            return Err(DomainError::Invalid("grid resolution must be at least 2 per axis".into()));
        }
        if !(self.mask_gprime > 0.0 && self.mask_detv > 0.0) {
            return Err(DomainError::Invalid("mask thresholds must be positive".into()));
        }
        Ok(())
    }

    pub fn periodic(&self) -> bool {
        match self.kind {
            DomainKind::Rectangle { periodic, .. } | DomainKind::Annulus { periodic, .. } => periodic,
        }
    }

    pub fn len(&self) -> usize {
        self.nu[0] * self.nu[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid coordinates along each axis (first axis inclusive; second axis half-open when
    /// periodic).
    fn axes(&self) -> (Vec<f64>, Vec<f64>) {
        let (a, b, periodic) = match self.kind {
            DomainKind::Rectangle { u1, u2, periodic } => (u1, u2, periodic),
            DomainKind::Annulus { r, theta, periodic } => (r, theta, periodic),
        };
        let [n1, n2] = self.nu;
        let first = (0..n1).map(|i| a[0] + (a[1] - a[0]) * i as f64 / (n1 - 1) as f64).collect();
        let div = if periodic { n2 } else { n2 - 1 } as f64;
        let second = (0..n2).map(|j| b[0] + (b[1] - b[0]) * j as f64 / div).collect();
        (first, second)
    }

    /// Parameter points `(u₁, u₂)` in row-major order: index `i * nu[1] + j`.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let (first, second) = self.axes();
        let polar = matches!(self.kind, DomainKind::Annulus { .. });
        let mut pts = Vec::with_capacity(self.len());
        for &s in &first {
            for &t in &second {
                pts.push(if polar { (s * t.cos(), s * t.sin()) } else { (s, t) });
            }
        }
        pts
    }

    /// Parses the domain part (`rect:…` / `annulus:…`) with default resolution and masks.
    pub fn parse(src: &str, nu: [usize; 2]) -> Result<Self, DomainError> {
        let syntax = |msg: &str| DomainError::Syntax(src.to_string(), msg.to_string());
        let (kind, rest) = src.trim().split_once(':').ok_or_else(|| syntax("expected `rect:` or `annulus:`"))?;
        let mut periodic = false;
        let mut nums = Vec::new();
        for tok in rest.split(',').map(str::trim) {
            if tok == "periodic" {
                periodic = true;
            } else {
                nums.push(parse_number(tok).ok_or_else(|| syntax(&format!("bad number `{tok}`")))?);
            }
        }
        let kind = match (kind.trim(), nums.as_slice()) {
            ("rect", &[a, b, c, d]) => DomainKind::Rectangle { u1: [a, b], u2: [c, d], periodic },
            ("annulus", &[r0, r1]) => DomainKind::Annulus { r: [r0, r1], theta: [0.0, TAU], periodic: true },
            ("annulus", &[r0, r1, t0, t1]) => DomainKind::Annulus { r: [r0, r1], theta: [t0, t1], periodic },
            ("rect", _) => return Err(syntax("rect needs 4 numbers")),
            ("annulus", _) => return Err(syntax("annulus needs 2 or 4 numbers")),
            _ => return Err(syntax("unknown domain kind")),
        };
        Self::new(kind, nu)
    }
}

fn parse_number(tok: &str) -> Option<f64> {
    let (sign, body) = match tok.strip_prefix('-') {
        Some(b) => (-1.0, b),
        None => (1.0, tok),
    };
    let v = match body {
        "pi" => PI,
        "tau" | "2pi" => TAU,
        other => other.parse::<f64>().ok()?,
    };
    Some(sign * v)
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DomainKind::Rectangle { u1, u2, periodic } => {
                write!(f, "rect:{:?},{:?},{:?},{:?}", u1[0], u1[1], u2[0], u2[1])?;
                if periodic {
                    f.write_str(",periodic")?;
                }
            }
            DomainKind::Annulus { r, theta, periodic } => {
                write!(f, "annulus:{:?},{:?},{:?},{:?}", r[0], r[1], theta[0], theta[1])?;
                if periodic {
                    f.write_str(",periodic")?;
                }
            }
        }
        Ok(())
    }
}

/// Parses `64` or `64x32`.
pub fn parse_resolution(src: &str) -> Option<[usize; 2]> {
    match src.split_once(['x', 'X']) {
        Some((a, b)) => Some([a.trim().parse().ok()?, b.trim().parse().ok()?]),
        None => {
            let n = src.trim().parse().ok()?;
            Some([n, n])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rectangles_and_annuli() {
        let d = DomainSpec::parse("rect:-1,1,-1,1", [4, 4]).unwrap();
        assert!(!d.periodic());
        let pts = d.points();
        assert_eq!(pts.len(), 16);
        assert_eq!(pts[0], (-1.0, -1.0));
        assert_eq!(pts[1], (-1.0, -1.0 + 2.0 / 3.0));
        assert_eq!(pts[15], (1.0, 1.0));

        let d = DomainSpec::parse("rect:-1.5,1.5,0,tau,periodic", [3, 4]).unwrap();
        assert!(d.periodic());
        let pts = d.points();
        assert_eq!(pts[3], (-1.5, 3.0 * TAU / 4.0));

        let d = DomainSpec::parse("annulus:0.4,1.5", [2, 4]).unwrap();
        assert!(d.periodic());
        let pts = d.points();
        assert!((pts[1].0).abs() < 1e-15 && (pts[1].1 - 0.4).abs() < 1e-15);
    }

    #[test]
    fn display_round_trips() {
        for src in ["rect:-1,1,-2,2", "rect:-1.5,1.5,0,tau,periodic", "annulus:0.4,1.5", "annulus:0.5,1,0,pi"] {
            let d = DomainSpec::parse(src, [8, 8]).unwrap();
            assert_eq!(DomainSpec::parse(&d.to_string(), [8, 8]).unwrap(), d);
        }
    }

    #[test]
    fn rejects_invalid_domains() {
        assert!(DomainSpec::parse("annulus:0,1", [4, 4]).is_err());
        assert!(DomainSpec::parse("annulus:-1,1", [4, 4]).is_err());
        assert!(DomainSpec::parse("rect:1,-1,0,1", [4, 4]).is_err());
        assert!(DomainSpec::parse("rect:-1,1,0", [4, 4]).is_err());
        assert!(DomainSpec::parse("disk:1", [4, 4]).is_err());
        assert!(DomainSpec::parse("rect:-1,1,0,1", [1, 4]).is_err());
        let d = DomainSpec::parse("rect:-1,1,0,1", [4, 4]).unwrap();
        assert!(d.with_masks(0.0, 1e-10).is_err());
    }

    #[test]
    fn resolution_syntax() {
        assert_eq!(parse_resolution("64"), Some([64, 64]));
        assert_eq!(parse_resolution("64x32"), Some([64, 32]));
        assert_eq!(parse_resolution("abc"), None);
    }
}
