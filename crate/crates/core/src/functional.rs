//! The quadratic functional `F_t(g) = ∫ |Ric|² + t R²`, its Euler–Lagrange
//! residuals and the integral identities satisfied by its critical metrics.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::curvature::{CurvatureBundle, Invariants, SecondOrder};
use crate::error::{invalid, Error, Result};
use crate::manifold::{Depth, Manifold, NodeData};
use crate::tensor::DenseTensor;

/// Relative Einstein tolerance `sup|R̊| / |R|` on homogeneous presets.
pub const EINSTEIN_TOL_CLOSED_FORM: f64 = 1e-8;
/// Relative Einstein tolerance on finite-difference charts.
pub const EINSTEIN_TOL_CHART: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalReport {
    pub t: f64,
    pub value_ft: f64,
    /// `∫ R`
    pub value_eh: f64,
    pub volume: f64,
    /// `λ` of the trace equation: `F_t / Vol` (equal to `F_t` at unit volume).
    pub lambda: f64,
    pub el_residual_sup: f64,
    pub el_residual_l2: f64,
    pub trace_residual_sup: f64,
    pub trace_residual_l2: f64,
    /// `sup|R̊| / sup|R|` (absolute `sup|R̊|` when `R ≡ 0`).
    pub einstein_ratio: f64,
    pub einstein: bool,
    /// Change of the residual sup when the difference step is doubled;
    /// `None` on closed-form presets.
    pub fd_error_estimate: Option<f64>,
    /// Set when the residual is not resolved above the finite-difference error.
    pub residual_unresolved: bool,
}

/// Value-only integrals (no derivatives needed).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalValue {
    pub t: f64,
    pub value_ft: f64,
    pub ricci_sq: f64,
    pub scalar_sq: f64,
    pub value_eh: f64,
    pub volume: f64,
}

pub fn functional_value(m: &Manifold, t: f64) -> Result<FunctionalValue> {
    check_t(t)?;
    let [ric, r2, r, vol] =
        m.integrate_many(Depth::Pointwise, |d| [d.invariants.ricci_sq, d.invariants.scalar.powi2(), d.invariants.scalar, 1.0])?;
    Ok(FunctionalValue { t, value_ft: ric + t * r2, ricci_sq: ric, scalar_sq: r2, value_eh: r, volume: vol })
}

trait Sq {
    fn powi2(self) -> f64;
}

impl Sq for f64 {
    #[inline]
    fn powi2(self) -> f64 {
        self * self
    }
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(invalid("t must be finite"))
    }
}

/// Pointwise defect of the tensor Euler–Lagrange equation in an orthonormal
/// frame:
/// `ΔR̊ − (1+2t)∇²R + ((1+2t)/n)ΔR g + 2R_{ikjl}R̊_{kl} + ((2+2nt)/n)R R̊ − (2/n)|R̊|² g`.
pub fn el_tensor_defect(b: &CurvatureBundle, s: &SecondOrder, t: f64) -> DenseTensor {
    let n = b.dim();
    let nf = n as f64;
    let eye = nalgebra::DMatrix::<f64>::identity(n, n);
    let lap_ric = s.ricci_laplacian(&eye);
    let hess_r = s.scalar_hessian(&eye);
    let lap_r: f64 = (0..n).map(|i| lap_ric.get(&[i, i])).sum();
    let rc = b.traceless_ricci.tensor();
    let rc_sq: f64 = rc.data().iter().map(|v| v * v).sum();
    DenseTensor::from_fn(2, n, |x| {
        let (i, j) = (x[0], x[1]);
        let delta = if i == j { 1.0 } else { 0.0 };
        let lap_rc = lap_ric.get(&[i, j]) - lap_r / nf * delta;
        let hess = 0.5 * (hess_r.get(&[i, j]) + hess_r.get(&[j, i]));
        let mut rm_rc = 0.0;
        for k in 0..n {
            for l in 0..n {
                rm_rc += b.riemann.get(&[i, k, j, l]) * rc.get(&[k, l]);
            }
        }
        lap_rc - (1.0 + 2.0 * t) * hess + (1.0 + 2.0 * t) / nf * lap_r * delta
            + 2.0 * rm_rc
            + (2.0 + 2.0 * nf * t) / nf * b.scalar * rc.get(&[i, j])
            - 2.0 / nf * rc_sq * delta
    })
}

/// `ΔR` from the Ricci Hessian (orthonormal frame).
pub fn scalar_laplacian(s: &SecondOrder) -> f64 {
    let n = s.ricci_hessian.dim();
    let mut v = 0.0;
    for i in 0..n {
        for a in 0..n {
            v += s.ricci_hessian.get(&[i, i, a, a]);
        }
    }
    v
}

/// `[n + 4(n−1)t] ΔR − (n−4)[|Ric|² + tR² − λ]`.
pub fn el_trace_defect(inv: &Invariants, lap_r: f64, t: f64, lambda: f64) -> f64 {
    let nf = inv.dim as f64;
    (nf + 4.0 * (nf - 1.0) * t) * lap_r - (nf - 4.0) * (inv.ricci_sq + t * inv.scalar * inv.scalar - lambda)
}

struct NodeResidual {
    weight: f64,
    tensor: f64,
    lap_r: f64,
    ricci_sq: f64,
    scalar_sq: f64,
}

struct Sweep {
    ft: f64,
    eh: f64,
    volume: f64,
    nodes: Vec<NodeResidual>,
    traceless_sup: f64,
    scalar_sup: f64,
    argmax: Option<crate::manifold::ChartPoint>,
}

fn sweep(m: &Manifold, t: f64) -> Result<Sweep> {
    let mut s = Sweep {
        ft: 0.0,
        eh: 0.0,
        volume: 0.0,
        nodes: Vec::new(),
        traceless_sup: 0.0,
        scalar_sup: 0.0,
        argmax: None,
    };
    let mut best = -1.0;
    m.for_each_node(Depth::SecondOrder, |d: &NodeData<'_>| {
        let inv = d.invariants;
        let second = d.second.ok_or_else(|| Error::Unsupported("second derivatives unavailable".into()))?;
        let defect = el_tensor_defect(d.bundle, second, t);
        let norm = libm::sqrt(defect.data().iter().map(|v| v * v).sum::<f64>());
        if !norm.is_finite() {
            return Err(Error::NonFinite(alloc::format!("Euler–Lagrange defect at {:?}", d.node.point.x)));
        }
        if norm > best {
            best = norm;
            s.argmax = Some(d.node.point.clone());
        }
        let w = d.node.weight;
        s.ft += w * (inv.ricci_sq + t * inv.scalar * inv.scalar);
        s.eh += w * inv.scalar;
        s.volume += w;
        s.traceless_sup = s.traceless_sup.max(libm::sqrt(inv.traceless_sq));
        s.scalar_sup = s.scalar_sup.max(inv.scalar.abs());
        s.nodes.push(NodeResidual {
            weight: w,
            tensor: norm,
            lap_r: scalar_laplacian(second),
            ricci_sq: inv.ricci_sq,
            scalar_sq: inv.scalar * inv.scalar,
        });
        Ok(())
    })?;
    Ok(s)
}

/// Sup and `L²` norms of the two Euler–Lagrange defects.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElResidual {
    pub tensor_sup: f64,
    pub tensor_l2: f64,
    pub trace_sup: f64,
    pub trace_l2: f64,
    pub lambda: f64,
}

fn residual_from(s: &Sweep, m: &Manifold, t: f64) -> ElResidual {
    let nf = m.dim() as f64;
    let lambda = s.ft / s.volume;
    let mut r = ElResidual { tensor_sup: 0.0, tensor_l2: 0.0, trace_sup: 0.0, trace_l2: 0.0, lambda };
    for node in &s.nodes {
        let tr = (nf + 4.0 * (nf - 1.0) * t) * node.lap_r - (nf - 4.0) * (node.ricci_sq + t * node.scalar_sq - lambda);
        r.tensor_sup = r.tensor_sup.max(node.tensor);
        r.trace_sup = r.trace_sup.max(tr.abs());
        r.tensor_l2 += node.weight * node.tensor * node.tensor;
        r.trace_l2 += node.weight * tr * tr;
    }
    r.tensor_l2 = libm::sqrt(r.tensor_l2);
    r.trace_l2 = libm::sqrt(r.trace_l2);
    r
}

pub fn el_residual(m: &Manifold, t: f64) -> Result<ElResidual> {
    check_t(t)?;
    let s = sweep(m, t)?;
    Ok(residual_from(&s, m, t))
}

/// `F_t`, `∫R`, volume, Einstein flag and both Euler–Lagrange residuals.
pub fn evaluate_functional(m: &Manifold, t: f64) -> Result<FunctionalReport> {
    check_t(t)?;
    let s = sweep(m, t)?;
    let r = residual_from(&s, m, t);
    let einstein_ratio = if s.scalar_sup > 0.0 { s.traceless_sup / s.scalar_sup } else { s.traceless_sup };
    let tol = if m.is_homogeneous() { EINSTEIN_TOL_CLOSED_FORM } else { EINSTEIN_TOL_CHART };

    let fd_error_estimate = match (&s.argmax, m.fd_steps()) {
        (Some(p), Some(steps)) => {
            let coarse = m.clone().with_fd_steps(crate::chart::FdSteps { field_second: 2.0 * steps.field_second, ..steps });
            let (b1, s1) = m.second_order(p)?;
            let (b2, s2) = coarse.second_order(p)?;
            let d1 = frame_defect(&b1, &s1, t)?;
            let d2 = frame_defect(&b2, &s2, t)?;
            Some(d1.max_abs_diff(&d2)? / 15.0)
        }
        _ => None,
    };
    let residual_unresolved = fd_error_estimate.is_some_and(|e| e >= 0.5 * r.tensor_sup);

    Ok(FunctionalReport {
        t,
        value_ft: s.ft,
        value_eh: s.eh,
        volume: s.volume,
        lambda: r.lambda,
        el_residual_sup: r.tensor_sup,
        el_residual_l2: r.tensor_l2,
        trace_residual_sup: r.trace_sup,
        trace_residual_l2: r.trace_l2,
        einstein_ratio,
        einstein: einstein_ratio < tol,
        fd_error_estimate,
        residual_unresolved,
    })
}

fn frame_defect(b: &CurvatureBundle, s: &SecondOrder, t: f64) -> Result<DenseTensor> {
    let e = crate::tensor::orthonormal_frame(&b.g)?;
    Ok(el_tensor_defect(&b.in_frame(&e)?, &s.in_frame(&e)?, t))
}

/// Both sides of an integral identity with the individual right-hand terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Balance {
    pub lhs: f64,
    pub terms: Vec<f64>,
    pub balance: f64,
}

impl Balance {
    fn new(lhs: f64, terms: Vec<f64>) -> Self {
        let balance = lhs - terms.iter().sum::<f64>();
        Self { lhs, terms, balance }
    }
}

/// `∫|∇R̊|²` minus the right side of the identity for critical metrics:
/// `∫ 2WR̊R̊ − (4/(n−2))R̊³ + ((2(n−2)+2n(n−1)t)/(n(n−1)))R|R̊|² + ((n−2)(1+2t)/(2n))|∇R|²`.
pub fn critical_gradient_balance(m: &Manifold, t: f64) -> Result<Balance> {
    check_t(t)?;
    let nf = m.dim() as f64;
    let c_r = (2.0 * (nf - 2.0) + 2.0 * nf * (nf - 1.0) * t) / (nf * (nf - 1.0));
    let c_grad = (nf - 2.0) * (1.0 + 2.0 * t) / (2.0 * nf);
    let [lhs, w, cubed, r, grad] = m.integrate_many(Depth::FirstOrder, |d| {
        let i = d.invariants;
        [
            i.grad_traceless_sq,
            2.0 * i.weyl_rr,
            -4.0 / (nf - 2.0) * i.traceless_cubed,
            c_r * i.scalar * i.traceless_sq,
            c_grad * i.grad_scalar_sq,
        ]
    })?;
    Ok(Balance::new(lhs, alloc::vec![w, cubed, r, grad]))
}

/// `∫|∇R̊|²` minus
/// `∫ WR̊R̊ − (n/(n−2))R̊³ − (1/(n−1))R|R̊|² + ((n−2)²/(4n(n−1)))|∇R|² + ½|C|²`,
/// which vanishes on every closed manifold.
pub fn traceless_gradient_balance(m: &Manifold) -> Result<Balance> {
    let nf = m.dim() as f64;
    let [lhs, w, cubed, r, grad, cotton] = m.integrate_many(Depth::FirstOrder, |d| {
        let i = d.invariants;
        [
            i.grad_traceless_sq,
            i.weyl_rr,
            -nf / (nf - 2.0) * i.traceless_cubed,
            -1.0 / (nf - 1.0) * i.scalar * i.traceless_sq,
            (nf - 2.0) * (nf - 2.0) / (4.0 * nf * (nf - 1.0)) * i.grad_scalar_sq,
            0.5 * i.cotton_sq,
        ]
    })?;
    Ok(Balance::new(lhs, alloc::vec![w, cubed, r, grad, cotton]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussBonnet {
    /// `∫ |W|² − 2|R̊|² + R²/6`
    pub lhs: f64,
    /// `32π²χ`
    pub rhs: f64,
}

impl GaussBonnet {
    pub fn relative_error(&self) -> f64 {
        if self.rhs == 0.0 {
            self.lhs.abs()
        } else {
            ((self.lhs - self.rhs) / self.rhs).abs()
        }
    }
}

pub fn gauss_bonnet_4d(m: &Manifold, chi: i64) -> Result<GaussBonnet> {
    if m.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: m.dim() });
    }
    let lhs = m.integrate(Depth::Pointwise, |i| i.weyl_sq - 2.0 * i.traceless_sq + i.scalar * i.scalar / 6.0)?;
    Ok(GaussBonnet { lhs, rhs: 32.0 * PI * PI * chi as f64 })
}

/// Sup over nodes of the three forms of `½Δ|R̊|²`:
/// - `generic`: `½Δ|R̊|² − |∇R̊|² − R̊·ΔR̊` (holds on every metric);
/// - `algebraic`: difference between the `R_{ikjl}` and the Weyl forms of the
///   curvature terms (holds on every metric);
/// - `critical`: `R̊·ΔR̊` minus its value forced by the tensor equation
///   (vanishes on critical metrics).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BochnerCheck {
    pub generic: f64,
    pub algebraic: f64,
    pub critical: f64,
}

pub fn bochner_check(m: &Manifold, t: f64) -> Result<BochnerCheck> {
    check_t(t)?;
    let mut out = BochnerCheck { generic: 0.0, algebraic: 0.0, critical: 0.0 };
    m.for_each_node(Depth::SecondOrder, |d| {
        let s = d.second.ok_or_else(|| Error::Unsupported("second derivatives unavailable".into()))?;
        let b = d.bundle;
        let inv = d.invariants;
        let n = b.dim();
        let nf = n as f64;
        let eye = nalgebra::DMatrix::<f64>::identity(n, n);
        let lap_ric = s.ricci_laplacian(&eye);
        let hess_r = s.scalar_hessian(&eye);
        let rc = b.traceless_ricci.tensor();
        let mut rc_lap = 0.0;
        let mut rc_hess = 0.0;
        let mut rm_rr = 0.0;
        for i in 0..n {
            for j in 0..n {
                rc_lap += rc.get(&[i, j]) * lap_ric.get(&[i, j]);
                rc_hess += rc.get(&[i, j]) * hess_r.get(&[i, j]);
                for k in 0..n {
                    for l in 0..n {
                        rm_rr += b.riemann.get(&[i, k, j, l]) * rc.get(&[k, l]) * rc.get(&[i, j]);
                    }
                }
            }
        }
        let line1 = inv.grad_traceless_sq + rc_lap;
        let line2 = inv.grad_traceless_sq + (1.0 + 2.0 * t) * rc_hess - 2.0 * rm_rr
            - (2.0 + 2.0 * nf * t) / nf * inv.scalar * inv.traceless_sq;
        let line3 = inv.grad_traceless_sq + (1.0 + 2.0 * t) * rc_hess
            - (2.0 * (nf - 2.0) + 2.0 * nf * (nf - 1.0) * t) / (nf * (nf - 1.0)) * inv.scalar * inv.traceless_sq
            + 4.0 / (nf - 2.0) * inv.traceless_cubed
            - 2.0 * inv.weyl_rr;
        out.generic = out.generic.max((0.5 * s.laplacian_traceless_sq - line1).abs());
        out.algebraic = out.algebraic.max((line2 - line3).abs());
        out.critical = out.critical.max((line1 - line2).abs());
        Ok(())
    })?;
    Ok(out)
}

/// Kato inequality `|∇R̊| ≥ |∇|R̊||` at nodes where `R̊ ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KatoCheck {
    pub checked_nodes: usize,
    pub violations: usize,
    /// `max(|∇|R̊|| − |∇R̊|)` over checked nodes.
    pub max_excess: f64,
}

/// Relative slack allowed for finite-difference noise in the Kato check.
pub const KATO_SLACK: f64 = 1e-9;

pub fn kato_check(m: &Manifold) -> Result<KatoCheck> {
    let mut out = KatoCheck { checked_nodes: 0, violations: 0, max_excess: f64::NEG_INFINITY };
    m.for_each_node(Depth::FirstOrder, |d| {
        let i = d.invariants;
        if i.traceless_sq <= 1e-24 {
            return Ok(());
        }
        let full = libm::sqrt(i.grad_traceless_sq);
        let abs = libm::sqrt(i.grad_abs_traceless_sq);
        out.checked_nodes += 1;
        out.max_excess = out.max_excess.max(abs - full);
        if abs > full * (1.0 + KATO_SLACK) + KATO_SLACK {
            out.violations += 1;
        }
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_three_sphere_value() {
        let m = Manifold::round_sphere(3, 1.0).unwrap();
        for t in [-1.0, -0.5, 0.0, 1.0] {
            let v = functional_value(&m, t).unwrap();
            assert!((v.value_ft - 2.0 * PI * PI * (12.0 + 36.0 * t)).abs() < 1e-10);
        }
        let r = evaluate_functional(&m, -0.5).unwrap();
        assert!((r.value_ft + 12.0 * PI * PI).abs() < 1e-10);
        assert!(r.el_residual_sup < 1e-12 && r.trace_residual_sup < 1e-10);
        assert!(r.einstein);
    }

    #[test]
    fn flat_torus_functional_vanishes() {
        let m = Manifold::flat_torus(&[1.0, 2.0, 0.5, 1.0]).unwrap();
        let r = evaluate_functional(&m, 0.3).unwrap();
        assert_eq!(r.value_ft, 0.0);
        assert!((r.volume - 1.0).abs() < 1e-15);
    }

    #[test]
    fn berger_is_not_critical() {
        let m = Manifold::berger_sphere(2.0, 1.0, 1.0).unwrap();
        let r = evaluate_functional(&m, -0.5).unwrap();
        assert!(r.el_residual_sup > 1e-3);
        assert!(!r.einstein);
        let tg = traceless_gradient_balance(&m).unwrap();
        assert!(tg.balance.abs() < 1e-10, "{tg:?}");
        assert!(critical_gradient_balance(&m, -0.5).unwrap().balance.abs() > 1e-3);
    }

    #[test]
    fn gauss_bonnet_on_homogeneous_four_manifolds() {
        let s4 = Manifold::round_sphere(4, 1.0).unwrap();
        let gb = gauss_bonnet_4d(&s4, 2).unwrap();
        assert!((gb.lhs - 64.0 * PI * PI).abs() < 1e-9);
        let s2s2 = Manifold::product_spheres(2, 1.0, 2, 1.0).unwrap();
        let gb = gauss_bonnet_4d(&s2s2, 4).unwrap();
        assert!((gb.lhs - 128.0 * PI * PI).abs() < 1e-9);
        assert!(gauss_bonnet_4d(&Manifold::round_sphere(3, 1.0).unwrap(), 0).is_err());
    }
}
