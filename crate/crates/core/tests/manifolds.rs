use qcf_core::chart::{AmbientForm, DerivativeMode, MAX_PERTURBATION};
use qcf_core::oracle::{oracle_berger, oracle_constant_curvature, oracle_product_curvature};
use qcf_core::tensor::random_orthogonal;
use qcf_core::{ChartPoint, Depth, Manifold};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn single_invariants(m: &Manifold) -> qcf_core::curvature::Invariants {
    let mut out = None;
    m.for_each_node(Depth::Pointwise, |d| {
        out = Some(*d.invariants);
        Ok(())
    })
    .unwrap();
    out.unwrap()
}

#[test]
fn round_spheres_match_closed_forms() {
    for n in 3..=6 {
        for r in [0.5, 1.0, 2.0] {
            let m = Manifold::round_sphere(n, r).unwrap();
            let o = oracle_constant_curvature(n, r).unwrap();
            let inv = single_invariants(&m);
            assert!(close(inv.scalar, o.scalar, 1e-12));
            assert!(close(inv.ricci_sq, o.scalars.ricci_sq, 1e-12));
            assert!(close(inv.riemann_sq, o.scalars.riemann_sq, 1e-12));
            assert!(inv.weyl_sq.abs() < 1e-20 && inv.traceless_sq.abs() < 1e-20);
            assert!(close(m.volume().unwrap(), o.volume, 1e-12));
        }
    }
}

#[test]
fn products_match_closed_forms() {
    for (p, r1, q, r2) in [(2, 1.0, 2, 1.0), (2, 1.0, 2, 2.0), (2, 0.7, 3, 1.3), (3, 1.0, 3, 1.0)] {
        let m = Manifold::product_spheres(p, r1, q, r2).unwrap();
        let o = oracle_product_curvature(p, r1, q, r2).unwrap();
        let inv = single_invariants(&m);
        assert!(close(inv.scalar, o.scalars.scalar, 1e-12));
        assert!(close(inv.ricci_sq, o.scalars.ricci_sq, 1e-12));
        assert!(close(inv.weyl_sq, o.scalars.weyl_sq, 1e-12));
        assert!(close(m.volume().unwrap(), o.volume, 1e-12));
    }
    let s2s2 = single_invariants(&Manifold::product_spheres(2, 1.0, 2, 1.0).unwrap());
    assert!(close(s2s2.weyl_sq, 16.0 / 3.0, 1e-12));
}

#[test]
fn berger_matches_milnor_frame() {
    for lambda in [[2.0, 1.0, 1.0], [1.0, 1.0, 1.0], [1.5, 0.8, 1.2], [0.5, 2.0, 3.0]] {
        let m = Manifold::berger_sphere(lambda[0], lambda[1], lambda[2]).unwrap();
        let o = oracle_berger(lambda).unwrap();
        let inv = single_invariants(&m);
        assert!(close(inv.scalar, o.scalar, 1e-12), "{lambda:?}");
        assert!(close(inv.traceless_sq, o.traceless_sq, 1e-12), "{lambda:?}");
        assert!(close(inv.traceless_cubed, o.traceless_cubed, 1e-11), "{lambda:?}");
        assert!(close(m.volume().unwrap(), o.volume, 1e-12));
        assert!(inv.weyl_sq.abs() < 1e-20);
    }
}

#[test]
fn sphere_chart_reproduces_round_sphere() {
    let m = Manifold::sphere_chart(3, AmbientForm::Round { radius: 1.0 }).unwrap();
    let o = oracle_constant_curvature(3, 1.0).unwrap();
    assert!(close(m.volume().unwrap(), o.volume, 1e-8));
    m.for_each_node(Depth::Pointwise, |d| {
        assert!(close(d.invariants.scalar, 6.0, 1e-7));
        assert!(d.invariants.traceless_sq.sqrt() < 1e-6);
        Ok(())
    })
    .unwrap();
}

#[test]
fn berger_chart_agrees_with_invariant_frame() {
    let lambda = [2.0, 1.0, 1.0];
    let chart = Manifold::sphere_chart(3, AmbientForm::Berger { lambda }).unwrap().with_resolution(6).unwrap();
    let o = oracle_berger(lambda).unwrap();
    assert!(close(chart.volume().unwrap(), o.volume, 1e-6));
    chart
        .for_each_node(Depth::Pointwise, |d| {
            assert!(close(d.invariants.scalar, o.scalar, 1e-6));
            assert!(close(d.invariants.traceless_sq, o.traceless_sq, 1e-6));
            Ok(())
        })
        .unwrap();
}

#[test]
fn exact_and_difference_jets_agree() {
    let form = AmbientForm::Perturbed { epsilon: 0.1, mode: 2 };
    let fd = Manifold::sphere_chart(3, form.clone()).unwrap();
    let exact = Manifold::sphere_chart(3, form).unwrap().with_derivatives(DerivativeMode::Exact);
    for x in [[0.1, -0.2, 0.3], [0.4, 0.0, -0.1]] {
        let p = ChartPoint { chart: 0, x: x.to_vec() };
        let a = fd.point_curvature(&p).unwrap();
        let b = exact.point_curvature(&p).unwrap();
        assert!(a.riemann.max_abs_diff(&b.riemann).unwrap() < 1e-6);
    }
}

#[test]
fn invariants_do_not_depend_on_the_frame() {
    let m = Manifold::perturbed_sphere(4, 0.05, 2).unwrap();
    let p = ChartPoint { chart: 0, x: vec![0.2, -0.1, 0.3, 0.05] };
    let b = m.curvature_bundle(&p).unwrap().to_orthonormal().unwrap();
    let base = b.invariants().unwrap();
    for seed in 0..5 {
        let q = random_orthogonal(4, seed);
        let r = b.in_frame(&q).unwrap().invariants().unwrap();
        for (x, y) in [
            (base.scalar, r.scalar),
            (base.ricci_sq, r.ricci_sq),
            (base.weyl_sq, r.weyl_sq),
            (base.kn_plus, r.kn_plus),
            (base.kn_minus, r.kn_minus),
            (base.cotton_sq, r.cotton_sq),
        ] {
            assert!(close(x, y, 1e-10), "{x} vs {y}");
        }
    }
}

#[test]
fn scaling_the_metric_rescales_curvature() {
    let c = 2.5;
    for m in [
        Manifold::round_sphere(4, 1.0).unwrap(),
        Manifold::berger_sphere(2.0, 1.0, 1.0).unwrap(),
        Manifold::perturbed_sphere(3, 0.05, 2).unwrap().with_resolution(6).unwrap(),
    ] {
        let n = m.dim() as f64;
        let s = m.scaled(c).unwrap();
        assert!(close(s.volume().unwrap(), m.volume().unwrap() * c.powf(n / 2.0), 1e-10));
        let total = |m: &Manifold| m.integrate(Depth::Pointwise, |i| i.scalar).unwrap();
        assert!(close(total(&s), total(&m) * c.powf(n / 2.0 - 1.0), 1e-8));
    }
}

#[test]
fn invalid_presets_are_rejected() {
    assert!(Manifold::round_sphere(1, 1.0).is_err());
    assert!(Manifold::round_sphere(3, -1.0).is_err());
    assert!(Manifold::round_sphere(3, f64::NAN).is_err());
    assert!(Manifold::berger_sphere(0.0, 1.0, 1.0).is_err());
    assert!(Manifold::perturbed_sphere(3, MAX_PERTURBATION * 1.5, 2).is_err());
    assert!(Manifold::round_sphere(3, 1.0).unwrap().scaled(0.0).is_err());
    assert!(Manifold::flat_torus(&[]).is_err());
}

#[test]
fn euler_characteristics() {
    assert_eq!(Manifold::round_sphere(4, 1.0).unwrap().euler_characteristic(), Some(2));
    assert_eq!(Manifold::round_sphere(3, 1.0).unwrap().euler_characteristic(), Some(0));
    assert_eq!(Manifold::product_spheres(2, 1.0, 2, 1.0).unwrap().euler_characteristic(), Some(4));
    assert_eq!(Manifold::flat_torus(&[1.0; 4]).unwrap().euler_characteristic(), Some(0));
}
