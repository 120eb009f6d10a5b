use nalgebra::DMatrix;
use proptest::prelude::*;
use qcf_core::oracle::{naive_kulkarni_nomizu, naive_ricci, naive_weyl, Rank4};
use qcf_core::tensor::{
    curvature_symmetry_defect, kulkarni_nomizu, project_curvature, random_curvature_tensor, random_orthogonal,
    ricci_contraction, weyl_part, DenseTensor, SymmetricBilinear,
};

fn sym(n: usize, vals: &[f64]) -> SymmetricBilinear {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = vals[k];
            m[(j, i)] = vals[k];
            k += 1;
        }
    }
    SymmetricBilinear::from_matrix(&m).unwrap()
}

fn to_rank4(t: &DenseTensor) -> Rank4 {
    let n = t.dim();
    let mut r = Rank4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    r.put(i, j, k, l, t.get(&[i, j, k, l]));
                }
            }
        }
    }
    r
}

fn sym_entries() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (3usize..=6).prop_flat_map(|n| {
        let m = n * (n + 1) / 2;
        (Just(n), prop::collection::vec(-2.0..2.0f64, m), prop::collection::vec(-2.0..2.0f64, m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kulkarni_nomizu_has_curvature_symmetries((n, a, b) in sym_entries()) {
        let h = sym(n, &a);
        let k = sym(n, &b);
        let hk = kulkarni_nomizu(&h, &k).unwrap();
        prop_assert!(curvature_symmetry_defect(&hk).max() < 1e-12);
        let kh = kulkarni_nomizu(&k, &h).unwrap();
        prop_assert!(hk.max_abs_diff(&kh).unwrap() < 1e-12);
    }

    #[test]
    fn kulkarni_nomizu_matches_naive_loops((n, a, b) in sym_entries()) {
        let h = sym(n, &a);
        let k = sym(n, &b);
        let fast = to_rank4(&kulkarni_nomizu(&h, &k).unwrap());
        let naive = naive_kulkarni_nomizu(h.tensor().data(), k.tensor().data(), n);
        for i in 0..n { for j in 0..n { for p in 0..n { for q in 0..n {
            prop_assert!((fast.at(i, j, p, q) - naive.at(i, j, p, q)).abs() < 1e-12);
        }}}}
    }

    #[test]
    fn projection_is_idempotent(n in 3usize..=6, seed in any::<u64>()) {
        let rm = random_curvature_tensor(n, seed).unwrap();
        let again = project_curvature(rm.tensor()).unwrap();
        prop_assert!(again.max_abs_diff(rm.tensor()).unwrap() < 1e-12);
        prop_assert!(curvature_symmetry_defect(rm.tensor()).max() < 1e-12);
    }

    #[test]
    fn weyl_is_trace_free_and_matches_naive(n in 3usize..=6, seed in any::<u64>()) {
        let rm = random_curvature_tensor(n, seed).unwrap();
        let g = SymmetricBilinear::identity(n);
        let w = weyl_part(rm.tensor(), &g).unwrap();
        let trace = ricci_contraction(&w, &DMatrix::identity(n, n));
        prop_assert!(trace.max_abs() < 1e-12);
        let naive = naive_weyl(&to_rank4(rm.tensor()));
        let fast = to_rank4(&w);
        for i in 0..n { for j in 0..n { for p in 0..n { for q in 0..n {
            prop_assert!((fast.at(i, j, p, q) - naive.at(i, j, p, q)).abs() < 1e-12);
        }}}}
        if n == 3 {
            prop_assert!(w.max_abs() < 1e-12);
        }
    }

    #[test]
    fn ricci_matches_naive(n in 3usize..=6, seed in any::<u64>()) {
        let rm = random_curvature_tensor(n, seed).unwrap();
        let fast = ricci_contraction(rm.tensor(), &DMatrix::identity(n, n));
        let naive = naive_ricci(&to_rank4(rm.tensor()));
        for (a, b) in fast.data().iter().zip(&naive) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_frames_preserve_norms(n in 3usize..=6, seed in any::<u64>()) {
        let rm = random_curvature_tensor(n, seed).unwrap();
        let q = random_orthogonal(n, seed.wrapping_add(1));
        let rotated = rm.tensor().in_frame(&q).unwrap();
        let a = rm.tensor().dot(rm.tensor()).unwrap();
        let b = rotated.dot(&rotated).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        prop_assert!(curvature_symmetry_defect(&rotated).max() < 1e-10);
    }
}

#[test]
fn kulkarni_nomizu_of_metric_is_constant_curvature() {
    let g = SymmetricBilinear::identity(4);
    let gg = kulkarni_nomizu(&g, &g).unwrap();
    assert_eq!(gg.get(&[0, 1, 0, 1]), 2.0);
    assert_eq!(gg.get(&[0, 1, 1, 0]), -2.0);
    assert_eq!(gg.get(&[0, 1, 2, 3]), 0.0);
}

#[test]
fn non_symmetric_input_is_rejected() {
    let t = DenseTensor::from_fn(2, 3, |i| if i == [0, 1] { 1.0 } else { 0.0 });
    assert!(SymmetricBilinear::new(t).is_err());
    assert!(DenseTensor::from_vec(2, 3, vec![0.0; 8]).is_err());
}
