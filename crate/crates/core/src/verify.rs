//! Grid-wide verification of a generated surface against its closed forms and the
//! finite-difference oracle.

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::domain::DomainSpec;
use crate::expr::{parse, ParseError};
use crate::geometry::{
    compute_v_closed, compute_v_direct, det_v_variants, fundamental_forms, gauss_map, gauss_map_partials,
    harmonicity_residual, immersion_with, radius_function, support_representation, FundamentalForms, GeomScalars,
    PointJets, Prefactor, SupportDerivs, SurfaceEval, Vec3,
};
use crate::oracle::{derivatives, oracle_eval, FdConfig, OracleError, OracleEval};
use crate::rotational::{rotational_surface_with, RotationalParams};
use crate::surface::{classify, Surface};

/// Default oracle spacing for verification runs (always with Richardson extrapolation).
pub const VERIFY_FD_STEP: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("cannot parse {which}: {source}")]
    Parse { which: &'static str, source: ParseError },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("unknown tolerance `{0}`")]
    UnknownTolerance(String),
    #[error("tolerance `{0}` must be positive and finite")]
    BadTolerance(String),
}

/// What to verify: a pair of expressions, or a member of the rotational family.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Pair { f: String, g: String },
    Rotational { a: f64, b: f64 },
}

impl Target {
    pub fn surface(&self) -> Result<Surface, VerifyError> {
        match self {
            Target::Pair { f, g } => {
                let f = parse(f).map_err(|source| VerifyError::Parse { which: "f", source })?;
                let g = parse(g).map_err(|source| VerifyError::Parse { which: "g", source })?;
                Ok(Surface::pair(f, g))
            }
            Target::Rotational { a, b } => Ok(Surface::rotational(RotationalParams::new(*a, *b))),
        }
    }
}

macro_rules! tolerances {
    ($($name:ident = $value:expr),* $(,)?) => {
        /// Per-check pass thresholds; names match the check names in the report.
        #[derive(Debug, Clone, Copy, PartialEq, Serialize)]
        pub struct Tolerances {
            $(pub $name: f64,)*
        }

        impl Default for Tolerances {
            fn default() -> Self {
                Self { $($name: $value,)* }
            }
        }

        impl Tolerances {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($name),)*];

            pub fn set(&mut self, name: &str, value: f64) -> Result<(), VerifyError> {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(VerifyError::BadTolerance(name.to_string()));
                }
                match name {
                    $(stringify!($name) => self.$name = value,)*
                    _ => return Err(VerifyError::UnknownTolerance(name.to_string())),
                }
                Ok(())
            }
        }
    };
}

tolerances! {
    ss_closed = 1e-8,
    ss_oracle = 1e-4,
    gauss_map = 1e-5,
    tangent_identity = 1e-5,
    trace_closed_form = 1e-10,
    trace = 1e-4,
    det = 1e-4,
    forms_oracle = 1e-5,
    forms_routes = 1e-10,
    third_form = 1e-8,
    v_routes = 1e-9,
    support_identity = 1e-10,
    support_representation = 1e-10,
    harmonicity = 1e-6,
    midsphere = 1e-8,
    midsphere_equivalence = 1e-10,
    radius = 1e-8,
    sphere_constant_f = 1e-8,
    sphere_rotational = 1e-10,
    rotational_equivalence = 1e-10,
}

/// Parses `name=value`.
pub fn parse_tolerance_override(src: &str) -> Option<(&str, f64)> {
    let (name, value) = src.split_once('=')?;
    Some((name.trim(), value.trim().parse().ok()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub target: Target,
    pub domain: DomainSpec,
    pub fd_step: f64,
    pub tolerances: Tolerances,
    pub prefactor: Prefactor,
}

impl VerifyOptions {
    pub fn new(target: Target, domain: DomainSpec) -> Self {
        Self {
            target,
            domain,
            fd_step: VERIFY_FD_STEP,
            tolerances: Tolerances::default(),
            prefactor: Prefactor::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub points_tested: usize,
    pub points_masked: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Comparison of the `detV` closed-form candidates against `V₁₁V₂₂ - V₁₂²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetVDiagnostic {
    pub points: usize,
    /// largest `|variant - product| / |product|` per candidate
    pub printed: f64,
    pub corrected_prefactor: f64,
    pub expanded: f64,
    /// candidates within `match_threshold` everywhere
    pub matching: Vec<String>,
    pub match_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub target: Target,
    pub domain: String,
    pub nu: [usize; 2],
    pub grid_points: usize,
    pub mask_gprime: f64,
    pub mask_detv: f64,
    pub prefactor: Prefactor,
    pub fd_step: f64,
    pub richardson: bool,
    pub tolerances: Tolerances,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    pub detv_diagnostic: DetVDiagnostic,
    pub provenance: Provenance,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Accumulates residuals in grid order so that reports are reproducible.
struct Stat {
    name: &'static str,
    tolerance: f64,
    max: f64,
    sum: f64,
    tested: usize,
    masked: usize,
    nan: bool,
}

impl Stat {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, max: 0.0, sum: 0.0, tested: 0, masked: 0, nan: false }
    }

    fn push(&mut self, r: Option<f64>) {
        match r {
            Some(r) => {
                self.tested += 1;
                if r.is_nan() {
                    self.nan = true;
                } else {
                    self.max = self.max.max(r);
                    self.sum += r;
                }
            }
            None => self.masked += 1,
        }
    }

    fn finish(self) -> CheckResult {
        let max = if self.nan { f64::NAN } else { self.max };
        let mean = if self.tested == 0 { 0.0 } else { self.sum / self.tested as f64 };
        CheckResult {
            name: self.name.to_string(),
            max_residual: max,
            mean_residual: mean,
            points_tested: self.tested,
            points_masked: self.masked,
            tolerance: self.tolerance,
            pass: self.tested > 0 && max <= self.tolerance,
        }
    }
}

/// Per-point data that does not depend on the orientation of the finite-difference normal.
struct PointData {
    eval: Option<SurfaceEval>,
    oracle: Option<OracleEval>,
    closed: Vec<Option<f64>>,
    rotational: Option<f64>,
    sphere: Option<f64>,
    detv: Option<[f64; 3]>,
}

const CLOSED_CHECKS: [&str; 14] = [
    "ss_closed",
    "ss_oracle",
    "tangent_identity",
    "trace_closed_form",
    "forms_routes",
    "third_form",
    "v_routes",
    "support_identity",
    "support_representation",
    "harmonicity",
    "midsphere",
    "midsphere_equivalence",
    "radius",
    "det",
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn point_checks(
    surface: &Surface,
    p: &PointJets,
    e: &SurfaceEval,
    oracle: Option<&OracleEval>,
    cfg: &FdConfig,
) -> Vec<Option<f64>> {
    let (f, g) = surface.exprs();
    let (u1, u2) = (e.u[0], e.u[1]);
    let v = e.v;
    let scalars = GeomScalars::new(p).ok();
    let [n1, n2] = gauss_map_partials(&p.g);

    let trace_closed = scalars.map(|s| {
        let closed = s.h * p.f.d1.norm_sqr() * s.t * s.t / (4.0 * p.g.d1.norm_sqr()) + 2.0 * s.h;
        rel(v.trace(), closed)
    });
    let forms_routes = fundamental_forms(p).ok().map(|fe| e.forms.relative_deviation(&fe));
    let third_form = {
        let normal = |a: f64, b: f64| {
            g.eval_jet(Complex64::new(a, b)).map(|j| gauss_map(&j)).unwrap_or_else(|_| Vec3::repeat(f64::NAN))
        };
        derivatives(&normal, u1, u2, cfg).ok().map(|d| {
            let l = e.forms.l;
            let worst = (d.xu.dot(&d.xu) - l).abs().max(d.xu.dot(&d.xv).abs()).max((d.xv.dot(&d.xv) - l).abs());
            worst / l
        })
    };
    let v_routes = compute_v_direct(p, &SupportDerivs::from_f(&p.f))
        .ok()
        .map(|vd| v.relative_deviation(&vd));
    let support_repr = support_representation(&SupportDerivs::from_f(&p.f), &p.g)
        .ok()
        .zip(immersion_with(p, Prefactor::InvNormSq).ok())
        .map(|(a, b)| (a - b).norm() / b.norm().max(1.0));
    let harmonic = harmonicity_residual(f, p.z).ok();

    // (|X + rN|² - r²) K = 2ψH + (Λ + ψ²)K when r = H/K + ψ/2
    let (h_mean, k) = (e.mean_curvature, e.gauss_curvature);
    let r = h_mean / k + e.psi / 2.0;
    let lhs = ((e.position() + e.normal() * r).norm_squared() - r * r) * k;
    let rhs = 2.0 * e.psi * h_mean + (e.lambda + e.psi * e.psi) * k;
    let scale = 1.0 + (2.0 * e.psi * h_mean).abs() + ((e.lambda + e.psi * e.psi) * k).abs() + (e.lambda + r * r) * k.abs();
    let midsphere_equiv = (lhs - rhs).abs() / scale;
    let radius = (radius_function(e) - r).abs() / (1.0 + r.abs());

    let tangent = oracle.map(|o| {
        let closed = [n1 * v.v11 + n2 * v.v12, n1 * v.v12 + n2 * v.v22];
        let fd = [o.tangent(0), o.tangent(1)];
        let scale = fd[0].norm().max(fd[1].norm());
        (fd[0] - closed[0]).norm().max((fd[1] - closed[1]).norm()) / scale
    });

    vec![
        Some(e.ss_residual),
        oracle.map(OracleEval::ss_residual),
        tangent,
        trace_closed,
        forms_routes,
        third_form,
        v_routes,
        Some(rel(e.psi, e.support)),
        support_repr,
        harmonic,
        Some(e.midsphere_residual),
        Some(midsphere_equiv),
        Some(radius),
        oracle.map(|o| (v.det() * o.gauss_curvature - 1.0).abs()),
    ]
}

fn evaluate_point(surface: &Surface, opts: &VerifyOptions, cfg: &FdConfig, u1: f64, u2: f64) -> PointData {
    let rotational = match (&opts.target, surface) {
        (Target::Rotational { .. }, Surface::Rotational { params, prefactor, .. }) => surface
            .jets(u1, u2)
            .and_then(|j| immersion_with(&j, *prefactor))
            .ok()
            .map(|x| (x - rotational_surface_with(params, u1, u2, *prefactor)).norm()),
        _ => None,
    };
    let eval = classify(surface, &opts.domain, u1, u2).ok();
    let Some(e) = eval else {
        return PointData { eval: None, oracle: None, closed: vec![None; CLOSED_CHECKS.len()], rotational, sphere: None, detv: None };
    };
    let p = surface.jets(u1, u2).expect("classified points have jets");
    let map = |a: f64, b: f64| surface.position(a, b);
    let oracle = stencil_is_immersed(surface, u1, u2, e.v.det(), cfg.step)
        .then(|| oracle_eval(&map, u1, u2, cfg).ok())
        .flatten();
    let closed = point_checks(surface, &p, &e, oracle.as_ref(), cfg);

    let sphere = match surface {
        Surface::Rotational { params, .. } if params.a == 0.0 => Some((e.position().norm() - params.b.exp()).abs()),
        Surface::Pair { f, .. } if !f.contains_var() => {
            let h = e.support;
            Some(
                (e.position().norm() - h)
                    .abs()
                    .max((e.mean_curvature + 1.0 / h).abs())
                    .max((e.gauss_curvature - 1.0 / (h * h)).abs()),
            )
        }
        _ => None,
    };
    let detv = det_v_variants(&p).ok().map(|d| {
        [rel(d.printed, d.product), rel(d.corrected_prefactor, d.product), rel(d.expanded, d.product)]
    });
    PointData { eval: Some(e), oracle, closed, rotational, sphere, detv }
}

/// False when `detV` vanishes or changes sign on the oracle stencil around the point: the
/// map is then not an immersion across the stencil and its finite-difference curvature is
/// undefined.
fn stencil_is_immersed(surface: &Surface, u1: f64, u2: f64, det: f64, step: f64) -> bool {
    let offsets = [-step, 0.0, step];
    offsets.iter().all(|&du| {
        offsets.iter().all(|&dv| {
            surface
                .jets(u1 + du, u2 + dv)
                .and_then(|p| compute_v_closed(&p))
                .is_ok_and(|v| v.det() * det > 0.0)
        })
    })
}

/// Signs `±1` making the finite-difference normal agree with `N`, fixed per connected
/// component of oracle-regular points (4-neighbour connectivity, wrapping when periodic).
///
/// `X,₁ × X,₂ = detV (N,₁ × N,₂)`, so the two normals swap orientation across the fold
/// curves `detV = 0`; components therefore never cross a sign change of `detV`.
fn component_signs(points: &[PointData], nu: [usize; 2], periodic: bool) -> Vec<Option<f64>> {
    let [n1, n2] = nu;
    let mut sign = vec![None; points.len()];
    let side = |k: usize| points[k].eval.as_ref().map(|e| e.v.det() > 0.0);
    let ok = |k: usize| points[k].oracle.is_some() && points[k].eval.is_some();
    for start in 0..points.len() {
        if sign[start].is_some() || !ok(start) {
            continue;
        }
        let (o, e) = (points[start].oracle.as_ref().unwrap(), points[start].eval.as_ref().unwrap());
        let s = if o.normal().dot(&e.normal()) < 0.0 { -1.0 } else { 1.0 };
        sign[start] = Some(s);
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            let (i, j) = (k / n2, k % n2);
            let mut nbrs = Vec::with_capacity(4);
            if i > 0 {
                nbrs.push(k - n2);
            }
            if i + 1 < n1 {
                nbrs.push(k + n2);
            }
            if j > 0 {
                nbrs.push(k - 1);
            } else if periodic {
                nbrs.push(k + n2 - 1);
            }
            if j + 1 < n2 {
                nbrs.push(k + 1);
            } else if periodic {
                nbrs.push(k + 1 - n2);
            }
            for m in nbrs {
                if sign[m].is_none() && ok(m) && side(m) == side(k) {
                    sign[m] = Some(s);
                    queue.push_back(m);
                }
            }
        }
    }
    sign
}

pub fn verify(opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let surface = opts.target.surface()?.with_prefactor(opts.prefactor);
    let cfg = FdConfig::new(opts.fd_step, true)?;
    let tol = &opts.tolerances;
    let pts = opts.domain.points();
    let data: Vec<PointData> =
        pts.par_iter().map(|&(u1, u2)| evaluate_point(&surface, opts, &cfg, u1, u2)).collect();
    let signs = component_signs(&data, opts.domain.nu, opts.domain.periodic());

    let tolerance_of = |name: &str| -> f64 {
        serde_json::to_value(tol).ok().and_then(|v| v.get(name).and_then(|x| x.as_f64())).expect("known check")
    };
    let mut closed_stats: Vec<Stat> = CLOSED_CHECKS.iter().map(|n| Stat::new(n, tolerance_of(n))).collect();
    let mut gauss = Stat::new("gauss_map", tol.gauss_map);
    let mut trace = Stat::new("trace", tol.trace);
    let mut forms = Stat::new("forms_oracle", tol.forms_oracle);
    let mut sphere = match &surface {
        Surface::Rotational { params, .. } if params.a == 0.0 => Some(Stat::new("sphere_rotational", tol.sphere_rotational)),
        Surface::Pair { f, .. } if !f.contains_var() => Some(Stat::new("sphere_constant_f", tol.sphere_constant_f)),
        _ => None,
    };
    let mut rotational = matches!(opts.target, Target::Rotational { .. })
        .then(|| Stat::new("rotational_equivalence", tol.rotational_equivalence));
    let mut detv_points = 0;
    let mut detv_max = [0.0f64; 3];

    for (d, s) in data.iter().zip(&signs) {
        for (stat, r) in closed_stats.iter_mut().zip(&d.closed) {
            stat.push(*r);
        }
        let pair = d.eval.as_ref().zip(d.oracle.as_ref()).zip(*s);
        gauss.push(pair.map(|((e, o), s)| {
            let (a, b) = (o.normal(), e.normal() * s);
            a.cross(&b).norm().atan2(a.dot(&b))
        }));
        trace.push(pair.map(|((e, o), s)| (e.v.trace() * o.gauss_curvature + 2.0 * s * o.mean_curvature).abs()));
        forms.push(pair.map(|((e, o), s)| {
            let fd = FundamentalForms {
                e1: o.e1,
                f1: o.f1,
                g1: o.g1,
                e2: -s * o.e2,
                f2: -s * o.f2,
                g2: -s * o.g2,
                l: e.forms.l,
            };
            e.forms.relative_deviation(&fd)
        }));
        if let Some(st) = sphere.as_mut() {
            st.push(d.sphere);
        }
        if let Some(st) = rotational.as_mut() {
            st.push(d.rotational);
        }
        if let Some(v) = d.detv {
            detv_points += 1;
            for (m, x) in detv_max.iter_mut().zip(v) {
                *m = m.max(x);
            }
        }
    }

    let mut checks: Vec<CheckResult> = Vec::new();
    let mut by_name: Vec<Stat> = closed_stats;
    by_name.extend([gauss, trace, forms]);
    by_name.extend(sphere);
    by_name.extend(rotational);
    let order = [
        "ss_closed",
        "ss_oracle",
        "gauss_map",
        "tangent_identity",
        "trace_closed_form",
        "trace",
        "det",
        "forms_oracle",
        "forms_routes",
        "third_form",
        "v_routes",
        "support_identity",
        "support_representation",
        "harmonicity",
        "midsphere",
        "midsphere_equivalence",
        "radius",
        "sphere_constant_f",
        "sphere_rotational",
        "rotational_equivalence",
    ];
    for name in order {
        if let Some(pos) = by_name.iter().position(|s| s.name == name) {
            checks.push(by_name.swap_remove(pos).finish());
        }
    }

    const MATCH: f64 = 1e-8;
    let names = ["printed", "corrected_prefactor", "expanded"];
    let matching = names
        .iter()
        .zip(detv_max)
        .filter(|(_, m)| detv_points > 0 && *m <= MATCH)
        .map(|(n, _)| n.to_string())
        .collect();
    let detv_diagnostic = DetVDiagnostic {
        points: detv_points,
        printed: detv_max[0],
        corrected_prefactor: detv_max[1],
        expanded: detv_max[2],
        matching,
        match_threshold: MATCH,
    };

    let dom = &opts.domain;
    Ok(VerificationReport {
        pass: checks.iter().all(|c| c.pass),
        checks,
        detv_diagnostic,
        provenance: Provenance {
            target: opts.target.clone(),
            domain: dom.to_string(),
            nu: dom.nu,
            grid_points: dom.len(),
            mask_gprime: dom.mask_gprime,
            mask_detv: dom.mask_detv,
            prefactor: opts.prefactor,
            fd_step: cfg.step,
            richardson: cfg.richardson,
            tolerances: *tol,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(target: Target, dom: &str) -> VerifyOptions {
        VerifyOptions::new(target, DomainSpec::parse(dom, [12, 12]).unwrap())
    }

    #[test]
    fn simplest_pair_passes_everything() {
        let rep = verify(&small(Target::Pair { f: "z".into(), g: "z".into() }, "rect:-1,1,-1,1")).unwrap();
        for c in &rep.checks {
            assert!(c.pass, "{c:?}");
            assert_eq!(c.points_tested + c.points_masked, 144);
        }
        assert!(rep.pass);
        assert_eq!(rep.detv_diagnostic.matching, vec!["expanded".to_string()]);
    }

    #[test]
    fn debug_prefactor_breaks_gauss_map() {
        let mut opts = small(Target::Pair { f: "z".into(), g: "z^3".into() }, "annulus:0.4,1.5");
        opts.prefactor = Prefactor::InvNorm;
        let rep = verify(&opts).unwrap();
        assert!(!rep.check("gauss_map").unwrap().pass);
        assert!(!rep.pass);
    }

    #[test]
    fn rotational_sphere_checks() {
        let rep = verify(&small(Target::Rotational { a: 0.0, b: 1.0 }, "rect:-1.5,1.5,0,tau,periodic")).unwrap();
        assert!(rep.check("rotational_equivalence").unwrap().pass);
        assert!(rep.check("sphere_rotational").unwrap().pass);
        assert!(rep.pass, "{:?}", rep.failed().collect::<Vec<_>>());
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("ss_oracle", 1e-3).unwrap();
        assert_eq!(t.ss_oracle, 1e-3);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("ss_oracle", -1.0).is_err());
        assert_eq!(parse_tolerance_override("radius=1e-6"), Some(("radius", 1e-6)));
        assert_eq!(Tolerances::NAMES.len(), 20);
    }

    #[test]
    fn parse_errors_surface() {
        let err = verify(&small(Target::Pair { f: "z +".into(), g: "z".into() }, "rect:-1,1,-1,1")).unwrap_err();
        assert!(matches!(err, VerifyError::Parse { which: "f", .. }));
    }
}
