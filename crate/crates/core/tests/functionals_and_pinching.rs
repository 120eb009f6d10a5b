use std::f64::consts::PI;

use proptest::prelude::*;
use qcf_core::functional::{
    bochner_check, el_residual, evaluate_functional, functional_value, gauss_bonnet_4d, kato_check,
    traceless_gradient_balance,
};
use qcf_core::rigidity::{
    check_condition, check_integral_corollaries, constant_cn, round_sphere_yamabe, yamabe_estimate,
    yamabe_lower_bound_4d, Conclusion, Condition, PinchingOptions, VerdictStatus,
};
use qcf_core::Manifold;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn verdict(m: &Manifold, c: Condition, t: f64) -> qcf_core::rigidity::PinchingVerdict {
    check_condition(m, c, t, None, m.euler_characteristic(), &PinchingOptions::default()).unwrap()
}

#[test]
fn functional_on_round_s4() {
    let m = Manifold::round_sphere(4, 1.0).unwrap();
    let v = functional_value(&m, -0.5).unwrap();
    let vol = 8.0 * PI * PI / 3.0;
    assert!(close(v.ricci_sq, 36.0 * vol, 1e-12));
    assert!(close(v.scalar_sq, 384.0 * PI * PI, 1e-12));
    assert!(close(v.value_ft, (36.0 - 72.0) * vol, 1e-12));
}

#[test]
fn einstein_presets_are_critical() {
    for m in [
        Manifold::round_sphere(3, 1.0).unwrap(),
        Manifold::round_sphere(5, 1.3).unwrap(),
        Manifold::product_spheres(2, 1.0, 2, 1.0).unwrap(),
        Manifold::flat_torus(&[1.0, 2.0, 1.0, 1.0]).unwrap(),
    ] {
        for t in [-1.0, -0.5, 0.0, 1.0] {
            let r = evaluate_functional(&m, t).unwrap();
            assert!(r.einstein);
            assert!(r.el_residual_sup <= 1e-8 && r.trace_residual_sup <= 1e-8, "{} t={t}", m.label());
        }
    }
}

#[test]
fn berger_is_not_critical() {
    let m = Manifold::berger_sphere(2.0, 1.0, 1.0).unwrap();
    let r = el_residual(&m, -0.5).unwrap();
    assert!(r.tensor_sup > 1e-3);
    assert!(!evaluate_functional(&m, -0.5).unwrap().einstein);
}

#[test]
fn non_finite_t_is_rejected() {
    let m = Manifold::round_sphere(3, 1.0).unwrap();
    assert!(functional_value(&m, f64::NAN).is_err());
    assert!(evaluate_functional(&m, f64::INFINITY).is_err());
}

#[test]
fn gauss_bonnet_on_closed_forms() {
    for (m, chi) in [
        (Manifold::round_sphere(4, 1.0).unwrap(), 2),
        (Manifold::product_spheres(2, 1.0, 2, 1.0).unwrap(), 4),
        (Manifold::product_spheres(2, 0.6, 2, 1.7).unwrap(), 4),
        (Manifold::flat_torus(&[1.0; 4]).unwrap(), 0),
    ] {
        let gb = gauss_bonnet_4d(&m, chi).unwrap();
        assert!(close(gb.rhs, 32.0 * PI * PI * chi as f64, 1e-14));
        assert!(gb.relative_error() < 1e-12, "{}", m.label());
    }
    assert!(gauss_bonnet_4d(&Manifold::round_sphere(3, 1.0).unwrap(), 0).is_err());
}

#[test]
fn berger_gradient_identities() {
    let m = Manifold::berger_sphere(2.0, 1.0, 1.0).unwrap();
    assert!(traceless_gradient_balance(&m).unwrap().balance.abs() <= 1e-8);
    let k = kato_check(&m).unwrap();
    assert_eq!(k.violations, 0);
}

#[test]
fn bochner_formula_on_perturbed_sphere() {
    let m = Manifold::perturbed_sphere(3, 0.05, 2).unwrap().with_resolution(6).unwrap();
    let b = bochner_check(&m, -0.5).unwrap();
    assert!(b.generic <= 1e-6 && b.algebraic <= 1e-9, "{b:?}");
}

#[test]
fn round_s3_pointwise_margins() {
    let m = Manifold::round_sphere(3, 1.0).unwrap();
    for t in [-0.45, -0.5, -1.0] {
        let v = verdict(&m, Condition::WeylRicciPointwise, t);
        assert!(close(v.margin, -2.0 * (5.0 + 12.0 * t), 1e-12));
        assert!(v.hypothesis_satisfied);
        let v = verdict(&m, Condition::TracelessPointwise3d, t);
        assert!(close(v.margin, -6f64.sqrt() * (5.0 + 12.0 * t), 1e-12));
        assert!(v.hypothesis_satisfied);
    }
    let v = verdict(&m, Condition::WeylRicciPointwise, -5.0 / 12.0);
    assert!(v.margin.abs() < 1e-12);
    assert!(!v.t_admissible && !v.hypothesis_satisfied);
}

#[test]
fn round_s4_half_pinching_margin() {
    let m = Manifold::round_sphere(4, 1.0).unwrap();
    let v = verdict(&m, Condition::WeylRicciPointwiseHalf, -0.5);
    assert!(close(v.margin, 4.0 * 3f64.sqrt(), 1e-12));
    assert!(v.hypothesis_satisfied);
}

#[test]
fn s2xs2_half_pinching_holds_with_equality() {
    let m = Manifold::product_spheres(2, 1.0, 2, 1.0).unwrap();
    let v = verdict(&m, Condition::WeylRicciPointwiseHalf, -0.5);
    assert!(close(v.lhs, 4.0 / 3f64.sqrt(), 1e-12));
    assert!(close(v.rhs, 4.0 / 3f64.sqrt(), 1e-12));
    assert!(v.margin.abs() < 1e-12);
    assert!(!v.hypothesis_satisfied);
}

#[test]
fn s2xs2_integral_corollaries_fail() {
    let m = Manifold::product_spheres(2, 1.0, 2, 1.0).unwrap();
    let v = verdict(&m, Condition::CurvatureIntegral4d, -0.5);
    assert!(close(v.lhs, 16.0 / 3.0 * 16.0 * PI * PI, 1e-12));
    assert!(close(v.rhs, 256.0 * PI * PI / 48.0, 1e-12));
    assert!(!v.hypothesis_satisfied);
    let ic = check_integral_corollaries(&m, -0.5, Some(4)).unwrap();
    assert!(ic.euler_equivalence.unwrap().abs() < 1e-9 * v.lhs);
}

#[test]
fn flat_torus_is_inapplicable() {
    let m = Manifold::flat_torus(&[1.0; 3]).unwrap();
    let v = verdict(&m, Condition::WeylRicciPointwise, -0.5);
    assert_eq!(v.status, VerdictStatus::Inapplicable);
    assert!(!v.hypothesis_satisfied);
}

#[test]
fn yamabe_conditions_need_a_value() {
    let m = Manifold::berger_sphere(2.0, 1.0, 1.0).unwrap();
    let v = verdict(&m, Condition::WeylRicciYamabe, -0.5);
    assert_eq!(v.status, VerdictStatus::Indeterminate);
    let s4 = Manifold::round_sphere(4, 1.0).unwrap();
    let y = round_sphere_yamabe(4);
    let v = check_condition(&s4, Condition::WeylRicciYamabe4d, -0.25, Some(y), None, &PinchingOptions::default()).unwrap();
    assert!(v.hypothesis_satisfied);
    let v = check_condition(&s4, Condition::WeylRicciYamabe4d, -1.0 / 6.0, Some(y), None, &PinchingOptions::default()).unwrap();
    assert!(!v.hypothesis_satisfied);
}

#[test]
fn s2xs2_yamabe_condition_fails_with_lower_bound() {
    let m = Manifold::product_spheres(2, 1.0, 2, 1.0).unwrap();
    let (y, clamped) = yamabe_lower_bound_4d(&m).unwrap();
    assert!(!clamped);
    assert!(close(y, 16.0 * PI, 1e-12));
    let v = check_condition(&m, Condition::WeylRicciYamabe, -0.5, Some(y), None, &PinchingOptions::default()).unwrap();
    assert!(close(v.lhs, 16.0 * PI / 3f64.sqrt(), 1e-12));
    assert!(!v.hypothesis_satisfied);
}

#[test]
fn dimension_gating() {
    let s3 = Manifold::round_sphere(3, 1.0).unwrap();
    let s4 = Manifold::round_sphere(4, 1.0).unwrap();
    let opts = PinchingOptions::default();
    assert!(check_condition(&s4, Condition::TracelessPointwise3d, -0.5, None, None, &opts).is_err());
    assert!(check_condition(&s3, Condition::Euler4d, -0.5, None, Some(0), &opts).is_err());
    assert!(check_condition(&s4, Condition::WeylRicciYamabeCn, -0.5, Some(1.0), None, &opts).is_err());
    assert!(constant_cn(3).is_err());
    assert!(close(constant_cn(4).unwrap(), 1.0 / 6f64.sqrt(), 1e-15));
}

#[test]
fn yamabe_estimate_on_round_s4() {
    let m = Manifold::round_sphere(4, 1.0).unwrap();
    let y = yamabe_estimate(&m).unwrap();
    let exact = y.known_exact.unwrap();
    assert!(close(exact, 12.0 * (8.0 * PI * PI / 3.0f64).sqrt(), 1e-12));
    assert!((y.upper - exact).abs() <= 5e-3 * exact);
    assert!(close(y.lower_4d.unwrap(), (384.0 * PI * PI).sqrt(), 1e-12));
    assert!(y.ordering_holds(1e-9));
}

/// On presets of known geometry that are critical for `F_t`, a satisfied
/// pinching hypothesis implies the conclusion holds there.
#[test]
fn satisfied_hypotheses_never_contradict_known_geometry() {
    struct Known {
        m: Manifold,
        einstein: bool,
        constant_curvature: bool,
    }
    let known = [
        Known { m: Manifold::round_sphere(3, 1.0).unwrap(), einstein: true, constant_curvature: true },
        Known { m: Manifold::round_sphere(4, 1.0).unwrap(), einstein: true, constant_curvature: true },
        Known { m: Manifold::round_sphere(6, 1.0).unwrap(), einstein: true, constant_curvature: true },
        Known { m: Manifold::product_spheres(2, 1.0, 2, 1.0).unwrap(), einstein: true, constant_curvature: false },
        Known { m: Manifold::product_spheres(2, 1.0, 2, 2.0).unwrap(), einstein: false, constant_curvature: false },
        Known { m: Manifold::product_spheres(3, 1.0, 3, 1.0).unwrap(), einstein: true, constant_curvature: false },
        Known { m: Manifold::berger_sphere(2.0, 1.0, 1.0).unwrap(), einstein: false, constant_curvature: false },
        Known { m: Manifold::berger_sphere(1.1, 1.0, 1.0).unwrap(), einstein: false, constant_curvature: false },
    ];
    let ts = [-1.0, -0.5, -0.45, -0.25, -0.2];
    for k in &known {
        let n = k.m.dim();
        let y = yamabe_estimate(&k.m).unwrap().usable();
        for c in Condition::ALL.iter().copied().filter(|c| c.applies_in(n)) {
            for &t in &ts {
                let r = el_residual(&k.m, t).unwrap();
                if r.tensor_sup > 1e-8 || r.trace_sup > 1e-8 {
                    continue;
                }
                let v = check_condition(&k.m, c, t, y, k.m.euler_characteristic(), &PinchingOptions::default()).unwrap();
                if v.hypothesis_satisfied {
                    let ok = match v.conclusion {
                        Conclusion::Einstein => k.einstein,
                        Conclusion::ConstantCurvature => k.constant_curvature,
                    };
                    assert!(ok, "{} satisfies {} at t={t} but is a counterexample", k.m.label(), c.id());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pointwise_verdicts_are_scale_covariant(c in 0.2f64..5.0, l1 in 0.5f64..3.0, t in -1.0f64..-0.42) {
        let m = Manifold::berger_sphere(l1, 1.0, 1.0).unwrap();
        let s = m.scaled(c).unwrap();
        for cond in [Condition::WeylRicciPointwise, Condition::TracelessPointwise3d] {
            let a = verdict(&m, cond, t);
            let b = verdict(&s, cond, t);
            prop_assert_eq!(a.status, b.status);
            prop_assert!((b.margin - a.margin / c).abs() <= 1e-10 * a.margin.abs().max(1.0));
        }
    }

    #[test]
    fn integral_verdicts_are_scale_invariant(c in 0.2f64..5.0, r in 0.5f64..2.0, t in -1.0f64..-0.2) {
        let m = Manifold::product_spheres(2, 1.0, 2, r).unwrap();
        let s = m.scaled(c).unwrap();
        for cond in [Condition::CurvatureIntegral4d, Condition::CurvatureIntegral4dT, Condition::Euler4d, Condition::Euler4dT] {
            let a = verdict(&m, cond, t);
            let b = verdict(&s, cond, t);
            prop_assert_eq!(a.status, b.status);
            prop_assert!((b.margin - a.margin).abs() <= 1e-9 * a.lhs.abs().max(1.0));
        }
    }
}
