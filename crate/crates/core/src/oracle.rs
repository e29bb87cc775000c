//! Finite-difference differential geometry of a black-box parameterization.
//!
//! Everything here is computed from samples of `(u₁, u₂) ↦ X` alone; no closed-form
//! quantity of the generated surfaces is consulted. The normal is `X,₁ × X,₂` normalized,
//! and the second form uses the standard convention `⟨X,ᵢⱼ, N⟩`.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{ss_relation_residual, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("finite-difference step must lie in (0, 1e-2], got {0}")]
    InvalidStep(f64),
    #[error("degenerate first fundamental form at ({0}, {1})")]
    Degenerate(f64, f64),
    #[error("surface map is not finite near ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("at least 3 samples are required, got {0}")]
    TooFewSamples(usize),
}

/// Central-difference spacing and whether to apply one level of Richardson extrapolation
/// (combining steps `h` and `h/2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdConfig {
    pub step: f64,
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: 1e-4, richardson: false }
    }
}

impl FdConfig {
    pub fn new(step: f64, richardson: bool) -> Result<Self, OracleError> {
        if !(step > 0.0 && step <= 1e-2) {
            return Err(OracleError::InvalidStep(step));
        }
        Ok(Self { step, richardson })
    }
}

/// Position and first/second partials of a parameterization at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub x: Vec3,
    pub xu: Vec3,
    pub xv: Vec3,
    pub xuu: Vec3,
    pub xuv: Vec3,
    pub xvv: Vec3,
}

fn stencil(map: &impl Fn(f64, f64) -> Vec3, u1: f64, u2: f64, d: f64) -> Derivatives {
    let x = map(u1, u2);
    let (p1, m1) = (map(u1 + d, u2), map(u1 - d, u2));
    let (p2, m2) = (map(u1, u2 + d), map(u1, u2 - d));
    let pp = map(u1 + d, u2 + d);
    let pm = map(u1 + d, u2 - d);
    let mp = map(u1 - d, u2 + d);
    let mm = map(u1 - d, u2 - d);
    Derivatives {
        x,
        xu: (p1 - m1) / (2.0 * d),
        xv: (p2 - m2) / (2.0 * d),
        xuu: (p1 - 2.0 * x + m1) / (d * d),
        xuv: (pp - pm - mp + mm) / (4.0 * d * d),
        xvv: (p2 - 2.0 * x + m2) / (d * d),
    }
}

pub fn derivatives(
    map: &impl Fn(f64, f64) -> Vec3,
    u1: f64,
    u2: f64,
    cfg: &FdConfig,
) -> Result<Derivatives, OracleError> {
    let coarse = stencil(map, u1, u2, cfg.step);
    let d = if cfg.richardson {
        let fine = stencil(map, u1, u2, cfg.step / 2.0);
        let r = |a: Vec3, b: Vec3| (4.0 * b - a) / 3.0;
        Derivatives {
            x: coarse.x,
            xu: r(coarse.xu, fine.xu),
            xv: r(coarse.xv, fine.xv),
            xuu: r(coarse.xuu, fine.xuu),
            xuv: r(coarse.xuv, fine.xuv),
            xvv: r(coarse.xvv, fine.xvv),
        }
    } else {
        coarse
    };
    let finite = [d.x, d.xu, d.xv, d.xuu, d.xuv, d.xvv]
        .iter()
        .all(|v| v.iter().all(|c| c.is_finite()));
    if !finite {
        return Err(OracleError::NonFinite(u1, u2));
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEval {
    pub e1: f64,
    pub f1: f64,
    pub g1: f64,
    pub e2: f64,
    pub f2: f64,
    pub g2: f64,
    pub n: [f64; 3],
    pub mean_curvature: f64,
    pub gauss_curvature: f64,
    pub psi: f64,
    pub lambda: f64,
    pub x: [f64; 3],
    pub tangents: [[f64; 3]; 2],
}

impl OracleEval {
    pub fn normal(&self) -> Vec3 {
        Vec3::from(self.n)
    }

    pub fn tangent(&self, i: usize) -> Vec3 {
        Vec3::from(self.tangents[i])
    }

    pub fn ss_residual(&self) -> f64 {
        ss_relation_residual(self.psi, self.lambda, self.mean_curvature, self.gauss_curvature)
    }
}

pub fn oracle_eval(
    map: &impl Fn(f64, f64) -> Vec3,
    u1: f64,
    u2: f64,
    cfg: &FdConfig,
) -> Result<OracleEval, OracleError> {
    let d = derivatives(map, u1, u2, cfg)?;
    let (e1, f1, g1) = (d.xu.dot(&d.xu), d.xu.dot(&d.xv), d.xv.dot(&d.xv));
    let first_det = e1 * g1 - f1 * f1;
    let cross = d.xu.cross(&d.xv);
    let cross_norm = cross.norm();
    if !(first_det > 0.0) || cross_norm == 0.0 {
        return Err(OracleError::Degenerate(u1, u2));
    }
    let n = cross / cross_norm;
    let (e2, f2, g2) = (d.xuu.dot(&n), d.xuv.dot(&n), d.xvv.dot(&n));
    let gauss = (e2 * g2 - f2 * f2) / first_det;
    let mean = (e2 * g1 - 2.0 * f2 * f1 + g2 * e1) / (2.0 * first_det);
    Ok(OracleEval {
        e1,
        f1,
        g1,
        e2,
        f2,
        g2,
        n: n.into(),
        mean_curvature: mean,
        gauss_curvature: gauss,
        psi: d.x.dot(&n),
        lambda: d.x.dot(&d.x),
        x: d.x.into(),
        tangents: [d.xu.into(), d.xv.into()],
    })
}

/// Summary of how well a set of samples satisfies `2ψH + (Λ + ψ²)K = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeingartenFit {
    pub max_residual: f64,
    pub mean_residual: f64,
    pub samples: usize,
    pub threshold: f64,
    pub pass: bool,
    pub warning: Option<String>,
}

pub fn weingarten_fit(samples: &[OracleEval], threshold: f64) -> Result<WeingartenFit, OracleError> {
    if samples.len() < 3 {
        return Err(OracleError::TooFewSamples(samples.len()));
    }
    let residuals: Vec<f64> = samples.iter().map(OracleEval::ss_residual).collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let mean_residual = residuals.iter().sum::<f64>() / residuals.len() as f64;
    let warning = samples
        .iter()
        .all(|s| s.x == samples[0].x)
        .then(|| format!("degenerate input: all {} samples are the same point", samples.len()));
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok(WeingartenFit {
        max_residual,
        mean_residual,
        samples: samples.len(),
        threshold,
        pass: max_residual <= threshold,
        warning,
    })
}
