//! Invariants of the closed forms, checked at random points of random pairs against the
//! finite-difference oracle.

use num_complex::Complex64;
use proptest::prelude::*;
use ssforge_core::geometry::{compute_v_closed, fundamental_forms, gauss_map, radius_function, FundamentalForms};
use ssforge_core::oracle::{oracle_eval, FdConfig};
use ssforge_core::rotational::{profile, rotational_surface};
use ssforge_core::{parse, HoloExpr, PointJets, RotationalParams, Surface, Vec3};

fn coeff() -> impl Strategy<Value = (f64, f64)> {
    (0.3f64..1.5, -1.0f64..1.0)
}

fn monomial(name: &'static str) -> impl Strategy<Value = String> {
    (coeff(), 1u32..4, -0.5f64..0.5).prop_map(move |((re, im), k, c)| {
        let base = match name {
            "exp" => "exp(z)".to_string(),
            "sin" => "sin(z)".to_string(),
            _ => format!("z^{k}"),
        };
        format!("({re}+{im}*i)*{base} + {c}")
    })
}

fn pair() -> impl Strategy<Value = (String, String)> {
    let f = prop_oneof![monomial("pow"), monomial("exp"), monomial("sin")];
    let g = prop_oneof![monomial("pow"), monomial("exp")];
    (f, g)
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-1.0f64..1.0, -1.0f64..1.0)
}

fn jets(f: &HoloExpr, g: &HoloExpr, u1: f64, u2: f64) -> Option<PointJets> {
    let p = PointJets::from_exprs(f, g, Complex64::new(u1, u2)).ok()?;
    (p.g.d1.norm() > 1e-3).then_some(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closed_forms_satisfy_the_ss_relation((fs, gs) in pair(), (u1, u2) in point()) {
        let (f, g) = (parse(&fs).unwrap(), parse(&gs).unwrap());
        let Some(p) = jets(&f, &g, u1, u2) else { return Ok(()) };
        let s = Surface::pair(f, g);
        let Ok(e) = s.evaluate(u1, u2) else { return Ok(()) };
        prop_assert!(e.ss_residual <= 1e-8, "{fs} / {gs} at ({u1}, {u2}): {}", e.ss_residual);
        // support identity
        prop_assert!((e.psi - e.support).abs() <= 1e-10 * e.support.max(1.0));
        // curvatures from V
        let v = compute_v_closed(&p).unwrap();
        prop_assert!((e.gauss_curvature * v.det() - 1.0).abs() <= 1e-10);
        prop_assert!((e.mean_curvature + v.trace() / (2.0 * v.det())).abs() <= 1e-10 * e.mean_curvature.abs().max(1.0));
        // both routes to the fundamental forms
        let explicit = fundamental_forms(&p).unwrap();
        prop_assert!(e.forms.relative_deviation(&explicit) <= 1e-10);
        // the tangent sphere through the origin has the mid-sphere radius
        let r = e.mean_curvature / e.gauss_curvature + e.psi / 2.0;
        prop_assert!((radius_function(&e) - r).abs() <= 1e-8 * (1.0 + r.abs()));
        prop_assert!(e.midsphere_residual <= 1e-8);
    }

    #[test]
    fn oracle_agrees_with_closed_forms((fs, gs) in pair(), (u1, u2) in point()) {
        let (f, g) = (parse(&fs).unwrap(), parse(&gs).unwrap());
        let Some(p) = jets(&f, &g, u1, u2) else { return Ok(()) };
        let s = Surface::pair(f, g);
        let Ok(e) = s.evaluate(u1, u2) else { return Ok(()) };
        // stay away from fold curves and nearly flat points, where FD curvature is ill-conditioned
        let v = compute_v_closed(&p).unwrap();
        if v.det().abs() < 1e-2 * (v.v11.powi(2) + v.v22.powi(2) + v.v12.powi(2)) || p.g.d1.norm() < 0.1 {
            return Ok(());
        }
        let map = |a: f64, b: f64| s.position(a, b);
        let Ok(o) = oracle_eval(&map, u1, u2, &FdConfig::new(1e-3, true).unwrap()) else { return Ok(()) };
        prop_assert!(o.ss_residual() <= 1e-4, "{fs} / {gs} at ({u1}, {u2}): {}", o.ss_residual());
        let n = gauss_map(&p.g);
        let dot = o.normal().dot(&n);
        let angle = o.normal().cross(&(n * dot.signum())).norm().atan2(dot.abs());
        prop_assert!(angle <= 1e-5, "angle {angle}");
        let s_ = dot.signum();
        let fd = FundamentalForms { e1: o.e1, f1: o.f1, g1: o.g1, e2: -s_ * o.e2, f2: -s_ * o.f2, g2: -s_ * o.g2, l: e.forms.l };
        prop_assert!(e.forms.relative_deviation(&fd) <= 1e-5);
    }

    #[test]
    fn rotational_closed_form_is_a_surface_of_revolution(
        a in -1.5f64..1.5, b in -1.0f64..1.0, u1 in -1.5f64..1.5, u2 in 0.0f64..6.3, phi in 0.0f64..6.3,
    ) {
        let params = RotationalParams::new(a, b);
        let x = rotational_surface(&params, u1, u2);
        let pr = profile(&params, u1);
        prop_assert!((x.x.hypot(x.y) - pr.m.abs()).abs() <= 1e-12 * (1.0 + pr.m.abs()));
        let y = rotational_surface(&params, u1, u2 + phi);
        let rot = Vec3::new(x.x * phi.cos() - x.y * phi.sin(), x.x * phi.sin() + x.y * phi.cos(), x.z);
        prop_assert!((y - rot).norm() <= 1e-12 * (1.0 + x.norm()));
        let general = Surface::pair(params.weierstrass_pair().0, params.weierstrass_pair().1).position(u1, u2);
        prop_assert!((general - x).norm() <= 1e-10 * (1.0 + x.norm()));
    }
}

#[test]
fn origin_centered_spheres_from_constant_support() {
    for r in [0.5f64, 1.0, 2.0, 3.7] {
        let f = parse(&format!("{:?}", r.ln())).unwrap();
        let s = Surface::pair(f, parse("z").unwrap());
        for (u1, u2) in [(0.0, 0.0), (0.7, -0.3), (-1.2, 1.9)] {
            let e = s.evaluate(u1, u2).unwrap();
            assert!((e.position().norm() - r).abs() <= 1e-12 * r);
            assert!((e.mean_curvature + 1.0 / r).abs() <= 1e-12);
            assert!((e.gauss_curvature - 1.0 / (r * r)).abs() <= 1e-12);
            assert!(e.ss_residual <= 1e-15);
        }
    }
}
