//! Surface sources and masked grid sampling.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::DomainSpec;
use crate::expr::HoloExpr;
use crate::geometry::{
    midsphere_residual, ss_residual, GeometryError, PointJets, Prefactor, SurfaceEval, Vec3,
};
use crate::rotational::{rotational_surface_with, RotationalParams};

/// A surface generated from a Weierstrass pair, either from user expressions or from the
/// rotational family (whose positions come from the closed profile formula).
#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    Pair { f: HoloExpr, g: HoloExpr, prefactor: Prefactor },
    Rotational { params: RotationalParams, f: HoloExpr, g: HoloExpr, prefactor: Prefactor },
}

impl Surface {
    pub fn pair(f: HoloExpr, g: HoloExpr) -> Self {
        Self::Pair { f, g, prefactor: Prefactor::default() }
    }

    pub fn rotational(params: RotationalParams) -> Self {
        let (f, g) = params.weierstrass_pair();
        Self::Rotational { params, f, g, prefactor: Prefactor::default() }
    }

    pub fn with_prefactor(mut self, p: Prefactor) -> Self {
        match &mut self {
            Self::Pair { prefactor, .. } | Self::Rotational { prefactor, .. } => *prefactor = p,
        }
        self
    }

    pub fn prefactor(&self) -> Prefactor {
        match self {
            Self::Pair { prefactor, .. } | Self::Rotational { prefactor, .. } => *prefactor,
        }
    }

    pub fn exprs(&self) -> (&HoloExpr, &HoloExpr) {
        match self {
            Self::Pair { f, g, .. } | Self::Rotational { f, g, .. } => (f, g),
        }
    }

    pub fn jets(&self, u1: f64, u2: f64) -> Result<PointJets, GeometryError> {
        let (f, g) = self.exprs();
        Ok(PointJets::from_exprs(f, g, Complex64::new(u1, u2))?)
    }

    pub fn evaluate(&self, u1: f64, u2: f64) -> Result<SurfaceEval, GeometryError> {
        let jets = self.jets(u1, u2)?;
        let mut eval = SurfaceEval::with_prefactor(&jets, self.prefactor())?;
        if let Self::Rotational { params, prefactor, .. } = self {
            let x = rotational_surface_with(params, u1, u2, *prefactor);
            eval.x = x.into();
            eval.psi = x.dot(&eval.normal());
            eval.lambda = x.dot(&x);
            eval.ss_residual = ss_residual(&eval);
            eval.midsphere_residual = midsphere_residual(&eval)?;
        }
        Ok(eval)
    }

    /// Position only, as a black box for the finite-difference oracle. Undefined points map
    /// to NaN.
    pub fn position(&self, u1: f64, u2: f64) -> Vec3 {
        match self {
            Self::Rotational { params, prefactor, .. } => rotational_surface_with(params, u1, u2, *prefactor),
            Self::Pair { prefactor, .. } => self
                .jets(u1, u2)
                .and_then(|j| crate::geometry::immersion_with(&j, *prefactor))
                .unwrap_or_else(|_| Vec3::repeat(f64::NAN)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskReason {
    /// `|g'|` below the threshold
    Gprime,
    /// `|detV|` below the threshold
    Detv,
    /// `f` or `g` undefined or non-finite at the point
    Undefined,
}

impl MaskReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gprime => "gprime",
            Self::Detv => "detv",
            Self::Undefined => "undefined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub u: [f64; 2],
    pub result: Result<SurfaceEval, MaskReason>,
}

impl Sample {
    pub fn eval(&self) -> Option<&SurfaceEval> {
        self.result.as_ref().ok()
    }
}

/// Evaluations over a domain grid, row-major with the second axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    pub nu: [usize; 2],
    pub periodic: bool,
    pub samples: Vec<Sample>,
}

impl SampledGrid {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nu[1] + j
    }

    pub fn unmasked(&self) -> impl Iterator<Item = &SurfaceEval> {
        self.samples.iter().filter_map(Sample::eval)
    }

    pub fn masked_count(&self) -> usize {
        self.samples.iter().filter(|s| s.result.is_err()).count()
    }
}

pub fn classify(surface: &Surface, dom: &DomainSpec, u1: f64, u2: f64) -> Result<SurfaceEval, MaskReason> {
    let jets = surface.jets(u1, u2).map_err(|_| MaskReason::Undefined)?;
    if !(jets.f.is_finite() && jets.g.is_finite()) {
        return Err(MaskReason::Undefined);
    }
    if jets.g.d1.norm() < dom.mask_gprime {
        return Err(MaskReason::Gprime);
    }
    match surface.evaluate(u1, u2) {
        Ok(e) if e.v.det().abs() >= dom.mask_detv => Ok(e),
        Ok(_) | Err(GeometryError::NotRegular) => Err(MaskReason::Detv),
        Err(GeometryError::SingularGaussMap(_)) => Err(MaskReason::Gprime),
        Err(_) => Err(MaskReason::Undefined),
    }
}

/// Evaluates every grid point in parallel; the result order does not depend on scheduling.
pub fn sample(surface: &Surface, dom: &DomainSpec) -> SampledGrid {
    let samples = dom
        .points()
        .into_par_iter()
        .map(|(u1, u2)| Sample { u: [u1, u2], result: classify(surface, dom, u1, u2) })
        .collect();
    SampledGrid { nu: dom.nu, periodic: dom.periodic(), samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn grid_is_row_major_and_complete() {
        let s = Surface::pair(parse("z").unwrap(), parse("z").unwrap());
        let dom = DomainSpec::parse("rect:-1,1,-1,1", [5, 3]).unwrap();
        let grid = sample(&s, &dom);
        assert_eq!(grid.samples.len(), 15);
        assert_eq!(grid.samples[grid.index(1, 2)].u, [-0.5, 1.0]);
        // detV = 0 exactly at z = 1 for this pair
        assert_eq!(grid.masked_count(), 1);
        assert_eq!(grid.samples[grid.index(4, 1)].result, Err(MaskReason::Detv));
    }

    #[test]
    fn masks_critical_points_of_g() {
        // g = z² has g'(0) = 0 at the grid center
        let s = Surface::pair(parse("z").unwrap(), parse("z^2").unwrap());
        let dom = DomainSpec::parse("rect:-1,1,-1,1", [5, 5]).unwrap();
        let grid = sample(&s, &dom);
        assert_eq!(grid.samples[12].result, Err(MaskReason::Gprime));
        assert_eq!(grid.masked_count(), 1);
    }

    #[test]
    fn masks_undefined_points() {
        let s = Surface::pair(parse("1/z").unwrap(), parse("z").unwrap());
        let dom = DomainSpec::parse("rect:-1,1,-1,1", [3, 3]).unwrap();
        let grid = sample(&s, &dom);
        assert_eq!(grid.samples[4].result, Err(MaskReason::Undefined));
    }

    #[test]
    fn rotational_positions_match_general_representation() {
        let s = Surface::rotational(RotationalParams::new(-1.0, 1.0));
        let (f, g) = s.exprs();
        let pair = Surface::pair(f.clone(), g.clone());
        for (u1, u2) in [(0.3, 1.0), (-1.2, 5.0)] {
            let a = s.evaluate(u1, u2).unwrap();
            let b = pair.evaluate(u1, u2).unwrap();
            assert!((a.position() - b.position()).norm() < 1e-10);
            assert!((a.ss_residual - b.ss_residual).abs() < 1e-10);
        }
    }
}
