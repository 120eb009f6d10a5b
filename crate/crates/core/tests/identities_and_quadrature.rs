use qcf_core::algebra::estimate_sweep;
use qcf_core::chart::AmbientForm;
use qcf_core::identities::identity_sweep;
use qcf_core::oracle::{derived_values, oracle_quadrature_refine};
use qcf_core::quadrature::{gauss_legendre, gauss_legendre_on, periodic_on};
use qcf_core::Manifold;

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    for n in 1..=12 {
        let (x, w) = gauss_legendre(n);
        for deg in 0..2 * n {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
        }
    }
    let (x, w) = gauss_legendre_on(5, 1.0, 3.0);
    let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
    assert!((q - 26.0 / 3.0).abs() < 1e-12);
}

#[test]
fn trapezoid_is_spectral_on_periodic_functions() {
    let (x, w) = periodic_on(16, 0.0, 2.0 * std::f64::consts::PI);
    let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.cos().powi(4)).sum();
    assert!((q - 0.75 * std::f64::consts::PI).abs() < 1e-13);
}

#[test]
fn identities_hold_on_the_perturbed_three_sphere() {
    let m = Manifold::perturbed_sphere(3, 0.05, 2).unwrap().with_resolution(6).unwrap();
    let s = identity_sweep(&m).unwrap();
    assert!(s.weyl_sup <= 1e-9);
    assert!(s.traceless_trace_sup <= 1e-9);
    assert!(s.cotton_forms_sup <= 1e-9);
    assert!(s.contracted_bianchi_sup <= 1e-6);
    assert!(s.riemann_symmetry_sup <= 1e-9);
}

#[test]
fn berger_chart_has_nonzero_cotton() {
    let m = Manifold::sphere_chart(3, AmbientForm::Berger { lambda: [2.0, 1.0, 1.0] }).unwrap().with_resolution(6).unwrap();
    let s = identity_sweep(&m).unwrap();
    assert!(s.cotton_forms_sup <= 1e-9);
    assert!(s.cotton_sup > 1.0);
}

#[test]
fn algebra_sweep_is_reproducible() {
    let a = estimate_sweep(5, 500, 7).unwrap();
    let b = estimate_sweep(5, 500, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.violations, 0);
    assert!(a.max_ratio <= 1.0);
}

#[test]
fn refinement_converges_to_total_scalar_square() {
    let m = Manifold::sphere_chart(4, AmbientForm::Round { radius: 1.0 }).unwrap();
    let r = oracle_quadrature_refine(&m, |i| i.scalar * i.scalar, &[3, 6, 12]).unwrap();
    assert!((r.value - 384.0 * std::f64::consts::PI.powi(2)).abs() < 1e-6 * r.value);
}

#[test]
fn derived_values_are_keyed_and_finite() {
    let recs = derived_values().unwrap();
    assert!(!recs.is_empty());
    let mut labels: Vec<(&str, &str)> = recs.iter().map(|r| (r.label.as_str(), r.inputs.as_str())).collect();
    labels.sort();
    labels.dedup();
    assert_eq!(labels.len(), recs.len());
    assert!(recs.iter().all(|r| r.value.is_finite() && r.tolerance >= 0.0));
}
