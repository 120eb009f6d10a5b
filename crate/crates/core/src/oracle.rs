//! Slow reference computations used to mint expected values for tests.
//!
//! Everything here is written with plain nested loops over orthonormal-frame
//! components and closed forms, and shares no code with the curvature
//! engine it checks.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::curvature::Invariants;
use crate::error::{invalid, Result};
use crate::manifold::{Depth, Manifold};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    ClosedForm,
    NaiveContraction,
    RefinedQuadrature,
}

impl OracleMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            OracleMethod::ClosedForm => "closed-form",
            OracleMethod::NaiveContraction => "naive-contraction",
            OracleMethod::RefinedQuadrature => "refined-quadrature",
        }
    }
}

/// One minted reference value. `inputs` is a canonical description of the
/// arguments; digests are taken by the ledger writer.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRecord {
    pub label: String,
    pub inputs: String,
    pub value: f64,
    pub method: OracleMethod,
    pub tolerance: f64,
}

/// Components of a rank-4 tensor in an orthonormal frame, `n⁴` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Rank4 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Rank4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn at(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.data[((i * n + j) * n + k) * n + l]
    }

    pub fn put(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let n = self.n;
        self.data[((i * n + j) * n + k) * n + l] = v;
    }
}

/// Riemann tensor of `S^n(r)` in an orthonormal frame:
/// `(δ_ik δ_jl − δ_il δ_jk)/r²`.
pub fn constant_curvature_riemann(n: usize, r: f64) -> Rank4 {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut rm = Rank4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    rm.put(i, j, k, l, (d(i, k) * d(j, l) - d(i, l) * d(j, k)) / (r * r));
                }
            }
        }
    }
    rm
}

/// Block-diagonal Riemann tensor of `S^p(r₁) × S^q(r₂)`.
pub fn product_riemann(p: usize, r1: f64, q: usize, r2: f64) -> Rank4 {
    let n = p + q;
    let mut rm = Rank4::zeros(n);
    let a = constant_curvature_riemann(p, r1);
    let b = constant_curvature_riemann(q, r2);
    for i in 0..p {
        for j in 0..p {
            for k in 0..p {
                for l in 0..p {
                    rm.put(i, j, k, l, a.at(i, j, k, l));
                }
            }
        }
    }
    for i in 0..q {
        for j in 0..q {
            for k in 0..q {
                for l in 0..q {
                    rm.put(p + i, p + j, p + k, p + l, b.at(i, j, k, l));
                }
            }
        }
    }
    rm
}

/// `Ric_ik = Σ_j R_ijkj` in an orthonormal frame, row-major `n×n`.
pub fn naive_ricci(rm: &Rank4) -> Vec<f64> {
    let n = rm.n;
    let mut ric = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += rm.at(i, j, k, j);
            }
            ric[i * n + k] = s;
        }
    }
    ric
}

pub fn naive_trace(h: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        s += h[i * n + i];
    }
    s
}

/// `(h∘∧k)_ijkl = h_ik k_jl − h_il k_jk + h_jl k_ik − h_jk k_il`
pub fn naive_kulkarni_nomizu(h: &[f64], k: &[f64], n: usize) -> Rank4 {
    let mut out = Rank4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = h[a * n + c] * k[b * n + d] - h[a * n + d] * k[b * n + c] + h[b * n + d] * k[a * n + c]
                        - h[b * n + c] * k[a * n + d];
                    out.put(a, b, c, d, v);
                }
            }
        }
    }
    out
}

/// `W = Rm − Ric∘∧g/(n−2) + R g∘∧g/(2(n−1)(n−2))`, orthonormal frame.
pub fn naive_weyl(rm: &Rank4) -> Rank4 {
    let n = rm.n;
    let nf = n as f64;
    let ric = naive_ricci(rm);
    let r = naive_trace(&ric, n);
    let mut id = vec![0.0; n * n];
    for i in 0..n {
        id[i * n + i] = 1.0;
    }
    let ricg = naive_kulkarni_nomizu(&ric, &id, n);
    let gg = naive_kulkarni_nomizu(&id, &id, n);
    let mut w = Rank4::zeros(n);
    for idx in 0..w.data.len() {
        w.data[idx] = rm.data[idx] - ricg.data[idx] / (nf - 2.0) + r * gg.data[idx] / (2.0 * (nf - 1.0) * (nf - 2.0));
    }
    w
}

pub fn naive_norm_sq(t: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in t {
        s += v * v;
    }
    s
}

/// `Ric − (R/n) g`
pub fn naive_traceless(ric: &[f64], n: usize) -> Vec<f64> {
    let r = naive_trace(ric, n);
    let mut out = ric.to_vec();
    for i in 0..n {
        out[i * n + i] -= r / n as f64;
    }
    out
}

/// Curvature scalars of an orthonormal-frame Riemann tensor, by loops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NaiveScalars {
    pub scalar: f64,
    pub ricci_sq: f64,
    pub traceless_sq: f64,
    pub riemann_sq: f64,
    pub weyl_sq: f64,
}

pub fn naive_scalars(rm: &Rank4) -> NaiveScalars {
    let n = rm.n;
    let ric = naive_ricci(rm);
    let rc = naive_traceless(&ric, n);
    NaiveScalars {
        scalar: naive_trace(&ric, n),
        ricci_sq: naive_norm_sq(&ric),
        traceless_sq: naive_norm_sq(&rc),
        riemann_sq: naive_norm_sq(&rm.data),
        weyl_sq: if n >= 3 { naive_norm_sq(&naive_weyl(rm).data) } else { 0.0 },
    }
}

/// Closed forms for `S^n(r)`: `Ric = (n−1)/r² g`, `R = n(n−1)/r²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantCurvatureOracle {
    pub ricci_eigenvalue: f64,
    pub scalar: f64,
    pub volume: f64,
    pub scalars: NaiveScalars,
}

pub fn oracle_constant_curvature(n: usize, r: f64) -> Result<ConstantCurvatureOracle> {
    if n < 2 || !(r > 0.0) {
        return Err(invalid("constant curvature oracle needs n >= 2 and r > 0"));
    }
    let nf = n as f64;
    Ok(ConstantCurvatureOracle {
        ricci_eigenvalue: (nf - 1.0) / (r * r),
        scalar: nf * (nf - 1.0) / (r * r),
        volume: unit_sphere_volume(n) * libm::pow(r, nf),
        scalars: naive_scalars(&constant_curvature_riemann(n, r)),
    })
}

/// `Vol(S^n(1))` by the two-step recursion `ω_n = 2π ω_{n−2}/(n−1)`.
pub fn unit_sphere_volume(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI * unit_sphere_volume(n - 2) / (n as f64 - 1.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductOracle {
    pub scalars: NaiveScalars,
    pub volume: f64,
}

pub fn oracle_product_curvature(p: usize, r1: f64, q: usize, r2: f64) -> Result<ProductOracle> {
    if p < 2 || q < 2 || !(r1 > 0.0) || !(r2 > 0.0) {
        return Err(invalid("product oracle needs factors of dimension >= 2 and positive radii"));
    }
    Ok(ProductOracle {
        scalars: naive_scalars(&product_riemann(p, r1, q, r2)),
        volume: unit_sphere_volume(p) * libm::pow(r1, p as f64) * unit_sphere_volume(q) * libm::pow(r2, q as f64),
    })
}

/// Left-invariant metric on `S³ = SU(2)` with eigenvalues `λ_i` on the frame
/// `X_i` with `[X_1, X_2] = 2X_3` (cyclic), through Milnor's principal
/// Ricci curvatures `r_1 = 2μ₂μ₃` (cyclic), `μ_i = ½(a₁+a₂+a₃) − a_i`,
/// `a_i = 2√λ_i / √(λ_j λ_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BergerOracle {
    pub ricci: [f64; 3],
    pub scalar: f64,
    pub traceless_sq: f64,
    /// `Σ (r_i − R/3)³`
    pub traceless_cubed: f64,
    pub volume: f64,
}

pub fn oracle_berger(lambda: [f64; 3]) -> Result<BergerOracle> {
    if lambda.iter().any(|l| !(*l > 0.0)) {
        return Err(invalid("Berger oracle needs positive eigenvalues"));
    }
    let [l1, l2, l3] = lambda;
    let a = [2.0 * libm::sqrt(l1 / (l2 * l3)), 2.0 * libm::sqrt(l2 / (l3 * l1)), 2.0 * libm::sqrt(l3 / (l1 * l2))];
    let h = 0.5 * (a[0] + a[1] + a[2]);
    let mu = [h - a[0], h - a[1], h - a[2]];
    let ricci = [2.0 * mu[1] * mu[2], 2.0 * mu[2] * mu[0], 2.0 * mu[0] * mu[1]];
    let scalar = ricci[0] + ricci[1] + ricci[2];
    let mut traceless_sq = 0.0;
    let mut traceless_cubed = 0.0;
    for r in ricci {
        let d = r - scalar / 3.0;
        traceless_sq += d * d;
        traceless_cubed += d * d * d;
    }
    Ok(BergerOracle { ricci, scalar, traceless_sq, traceless_cubed, volume: 2.0 * PI * PI * libm::sqrt(l1 * l2 * l3) })
}

/// An integral extrapolated from a sequence of resolutions.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedIntegral {
    pub value: f64,
    pub error_estimate: f64,
    /// `(resolution, integral)` per level.
    pub levels: Vec<(usize, f64)>,
    /// Observed convergence order when it could be estimated.
    pub order: Option<f64>,
}

/// Richardson extrapolation of `∫ f dv_g` over at least three resolutions,
/// each twice the previous one. The order is estimated from the last three
/// levels; the error estimate is the last successive difference.
pub fn oracle_quadrature_refine(
    m: &Manifold,
    mut f: impl FnMut(&Invariants) -> f64,
    levels: &[usize],
) -> Result<RefinedIntegral> {
    if levels.len() < 3 {
        return Err(invalid("refinement needs at least three levels"));
    }
    if levels.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(invalid("each refinement level must double the previous resolution"));
    }
    let mut values = Vec::with_capacity(levels.len());
    for &res in levels {
        let mm = m.clone().with_resolution(res)?;
        let depth = Depth::Pointwise;
        values.push((res, mm.integrate(depth, &mut f)?));
    }
    let k = values.len();
    let (a, b, c) = (values[k - 3].1, values[k - 2].1, values[k - 1].1);
    let d1 = b - a;
    let d2 = c - b;
    let floor = 1e-14 * c.abs().max(1.0);
    let (value, order) = if d2.abs() <= floor || d1.abs() <= floor {
        (c, None)
    } else {
        let ratio = d1 / d2;
        if ratio > 1.0 {
            let p = libm::log2(ratio);
            (c + d2 / (libm::pow(2.0, p) - 1.0), Some(p))
        } else {
            (c, None)
        }
    };
    Ok(RefinedIntegral { value, error_estimate: d2.abs(), levels: values, order })
}

fn rec(label: &str, inputs: String, value: f64, method: OracleMethod, tolerance: f64) -> OracleRecord {
    OracleRecord { label: label.into(), inputs, value, method, tolerance }
}

/// Every reference value the test suites compare against, each produced by
/// exactly one oracle.
pub fn derived_values() -> Result<Vec<OracleRecord>> {
    use OracleMethod::*;
    let mut out = Vec::new();
    let s3 = oracle_constant_curvature(3, 1.0)?;
    out.push(rec("s3.scalar", "n=3,r=1".into(), s3.scalar, ClosedForm, 0.0));
    out.push(rec("s3.weyl_sq", "n=3,r=1".into(), s3.scalars.weyl_sq, NaiveContraction, 1e-12));
    let s4r2 = oracle_constant_curvature(4, 2.0)?;
    out.push(rec("s4r2.scalar", "n=4,r=2".into(), s4r2.scalar, ClosedForm, 0.0));
    let s4 = oracle_constant_curvature(4, 1.0)?;
    out.push(rec("s4.scalar_sq_integral", "n=4,r=1".into(), s4.scalar * s4.scalar * s4.volume, ClosedForm, 1e-12));
    out.push(rec("s4.gauss_bonnet", "n=4,r=1,chi=2".into(), 64.0 * PI * PI, ClosedForm, 1e-12));
    let yam = 12.0 * libm::sqrt(s4.volume);
    out.push(rec("s4.yamabe", "n=4".into(), yam, ClosedForm, 1e-12));

    let p = oracle_product_curvature(2, 1.0, 2, 1.0)?;
    out.push(rec("s2xs2.scalar", "p=2,r1=1,q=2,r2=1".into(), p.scalars.scalar, NaiveContraction, 1e-12));
    out.push(rec("s2xs2.weyl_sq", "p=2,r1=1,q=2,r2=1".into(), p.scalars.weyl_sq, NaiveContraction, 1e-12));
    out.push(rec("s2xs2.traceless_sq", "p=2,r1=1,q=2,r2=1".into(), p.scalars.traceless_sq, NaiveContraction, 1e-12));
    out.push(rec("s2xs2.volume", "p=2,r1=1,q=2,r2=1".into(), p.volume, ClosedForm, 1e-12));
    let ci = p.scalars.scalar * p.scalars.scalar * p.volume;
    out.push(rec("s2xs2.scalar_sq_integral", "p=2,r1=1,q=2,r2=1".into(), ci, NaiveContraction, 1e-12));
    out.push(rec("s2xs2.weyl_sq_integral", "p=2,r1=1,q=2,r2=1".into(), p.scalars.weyl_sq * p.volume, NaiveContraction, 1e-12));
    out.push(rec("s2xs2.yamabe_lower_4d", "p=2,r1=1,q=2,r2=1".into(), libm::sqrt(ci), NaiveContraction, 1e-12));
    let gb = (p.scalars.weyl_sq - 2.0 * p.scalars.traceless_sq + p.scalars.scalar * p.scalars.scalar / 6.0) * p.volume;
    out.push(rec("s2xs2.gauss_bonnet", "p=2,r1=1,q=2,r2=1".into(), gb, NaiveContraction, 1e-12));
    let pu = oracle_product_curvature(2, 1.0, 2, 1.5)?;
    out.push(rec("s2xs2_unequal.traceless_sq", "p=2,r1=1,q=2,r2=1.5".into(), pu.scalars.traceless_sq, NaiveContraction, 1e-12));

    // pointwise pinching margins on the round S³ and the 3D traceless margin
    for t in [-0.45, -0.5, -1.0] {
        let (n, r) = (3.0, s3.scalar);
        let m11 = -libm::sqrt(2.0 / ((n - 1.0) * (n - 2.0))) * ((2.0 * (n - 2.0) + 2.0 * n * (n - 1.0) * t) / n + 1.0) * r;
        out.push(rec("s3.weyl_ricci_pointwise_margin", format!("t={t}"), m11, ClosedForm, 1e-12));
        let m12 = -(5.0 + 12.0 * t) / libm::sqrt(6.0) * r;
        out.push(rec("s3.traceless_pointwise_margin", format!("t={t}"), m12, ClosedForm, 1e-12));
    }
    out.push(rec("s4.weyl_ricci_half_margin", "n=4,r=1".into(), 8.0 / (4.0 * libm::sqrt(12.0)) * s4.scalar, ClosedForm, 1e-12));

    let b = oracle_berger([2.0, 1.0, 1.0])?;
    out.push(rec("berger211.scalar", "lambda=2,1,1".into(), b.scalar, ClosedForm, 1e-12));
    out.push(rec("berger211.traceless_sq", "lambda=2,1,1".into(), b.traceless_sq, ClosedForm, 1e-12));
    out.push(rec("berger211.traceless_cubed", "lambda=2,1,1".into(), b.traceless_cubed, ClosedForm, 1e-12));
    out.push(rec("berger211.volume", "lambda=2,1,1".into(), b.volume, ClosedForm, 1e-12));
    // unit-volume normalization scales λ by c = Vol^(−2/3), curvature by 1/c
    let c = libm::pow(b.volume, -2.0 / 3.0);
    let bn = oracle_berger([2.0 * c, c, c])?;
    let margin = -(5.0 - 6.0) / libm::sqrt(6.0) * bn.scalar - libm::sqrt(bn.traceless_sq);
    out.push(rec("berger211_unit.traceless_pointwise_margin", "lambda=2,1,1,unit volume,t=-0.5".into(), margin, ClosedForm, 1e-12));

    let s3q = oracle_quadrature_refine(
        &Manifold::sphere_chart(3, crate::chart::AmbientForm::Round { radius: 1.0 })?,
        |_| 1.0,
        &[4, 8, 16],
    )?;
    out.push(rec("s3.volume_refined", "n=3,levels=4,8,16".into(), s3q.value, RefinedQuadrature, s3q.error_estimate.max(1e-12)));
    Ok(out)
}
