use qcf_core::optimize::{
    critical_search, fd_gradient, normalize_volume, BergerFamily, MetricFamily, ProductFamily, SearchOptions, SearchStatus,
};

#[test]
fn sixth_order_gradient_is_exact_on_quintics() {
    let mut f = |x: &[f64]| Ok(x[0].powi(5) - 3.0 * x[0] * x[1] + x[1].powi(3));
    let g = fd_gradient(&mut f, &[1.2, -0.7], 1e-2).unwrap();
    assert!((g[0] - (5.0 * 1.2f64.powi(4) + 2.1)).abs() < 1e-9);
    assert!((g[1] - (-3.6 + 3.0 * 0.49)).abs() < 1e-9);
}

#[test]
fn normalization_gives_unit_volume() {
    let fam = BergerFamily { axial: false };
    let unit = normalize_volume(&fam, &[1.7, 0.4, 2.2]).unwrap();
    let v = fam.manifold(&unit).unwrap().volume().unwrap();
    assert!((v - 1.0).abs() < 1e-12);
}

#[test]
fn berger_axial_converges_to_round() {
    let fam = BergerFamily { axial: true };
    let r = critical_search(&fam, -0.5, &[1.5, 1.0], &SearchOptions::default()).unwrap();
    assert_eq!(r.status, SearchStatus::Converged);
    assert!(r.iterations < 200);
    assert!((r.theta[0] / r.theta[1] - 1.0).abs() < 1e-5);
    assert!((r.volume - 1.0).abs() < 1e-9);
    assert!(r.report.einstein);
}

#[test]
fn product_family_reaches_symmetric_point() {
    let fam = ProductFamily { p: 2, q: 2 };
    let r = critical_search(&fam, 0.0, &[1.0, 1.3], &SearchOptions::default()).unwrap();
    assert_eq!(r.status, SearchStatus::Converged);
    assert!((r.theta[0] / r.theta[1] - 1.0).abs() < 1e-5);
    assert!((r.volume - 1.0).abs() < 1e-9);
}

#[test]
fn einstein_start_converges_immediately() {
    let fam = BergerFamily { axial: true };
    let r = critical_search(&fam, -0.5, &[1.0, 1.0], &SearchOptions::default()).unwrap();
    assert_eq!(r.status, SearchStatus::Converged);
    assert_eq!(r.iterations, 0);
}

#[test]
fn one_iteration_is_not_enough() {
    let fam = BergerFamily { axial: true };
    let opts = SearchOptions { max_iterations: 1, ..SearchOptions::default() };
    let r = critical_search(&fam, -0.5, &[1.5, 1.0], &opts).unwrap();
    assert_eq!(r.status, SearchStatus::MaxIterations);
}

#[test]
fn searches_are_deterministic() {
    let fam = BergerFamily { axial: false };
    let opts = SearchOptions { max_iterations: 20, ..SearchOptions::default() };
    let a = critical_search(&fam, -0.5, &[1.4, 1.0, 0.8], &opts).unwrap();
    let b = critical_search(&fam, -0.5, &[1.4, 1.0, 0.8], &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_starts_are_rejected() {
    let fam = BergerFamily { axial: true };
    let opts = SearchOptions::default();
    assert!(critical_search(&fam, -0.5, &[1.0], &opts).is_err());
    assert!(critical_search(&fam, -0.5, &[-1.0, 1.0], &opts).is_err());
    assert!(critical_search(&fam, f64::NAN, &[1.0, 1.0], &opts).is_err());
}
