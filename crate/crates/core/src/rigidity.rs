//! Pinching conditions of the rigidity theorems for critical metrics of
//! `F_t`, evaluated as explicit margins, together with the constant
//! inequalities their proofs use and estimates of the Yamabe invariant.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::curvature::Invariants;
use crate::error::{invalid, Error, Result};
use crate::homogeneous::sphere_volume;
use crate::manifold::{Depth, Manifold};
use crate::optimize::{fd_gradient, minimize, SearchOptions, SearchStatus};

/// The pinching conditions. Identifiers name the quantity being pinched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `|W − ((n−4)/(√(2n)(n−2))) R̊∘∧g| < −√(2/((n−1)(n−2)))·((2(n−2)+2n(n−1)t)/n + 1)·R`
    WeylRicciPointwise,
    /// `|R̊| < −((5+12t)/√6)·R` in dimension 3.
    TracelessPointwise3d,
    /// `|W + (√2/(√n(n−2))) R̊∘∧g| ≤ ((n²−3n+4)/(n√(2(n−1)(n−2))))·R` at `t = −1/2`,
    /// strict somewhere.
    WeylRicciPointwiseHalf,
    /// `(∫|W + (√2/(√n(n−2))) R̊∘∧g|^{n/2})^{2/n} ≤ ¼√((n−2)/(2(n−1)))·Y`
    WeylRicciYamabe,
    /// The same integral `< C_n·Y`, `n ≥ 6`.
    WeylRicciYamabeCn,
    /// `(∫|W + R̊∘∧g/(2√2)|²)^{1/2} < −((1+6t)/(2√3))·Y` in dimension 4.
    WeylRicciYamabe4d,
    /// `∫(|W|² + (5/4)|R̊|²) ≤ (1/48)∫R²` in dimension 4.
    CurvatureIntegral4d,
    /// `∫(|W|² + [1+(1+6t)²]|R̊|²) ≤ ((1+6t)²/12)∫R²` in dimension 4.
    CurvatureIntegral4dT,
    /// `(13/2)∫|W|² + (1/3)∫R² ≤ 80π²χ`
    Euler4d,
    /// `((3+(1+6t)²)/2)∫|W|² + (1/12)∫R² ≤ 16[1+(1+6t)²]π²χ`
    Euler4dT,
}

impl Condition {
    pub const ALL: [Condition; 10] = [
        Condition::WeylRicciPointwise,
        Condition::TracelessPointwise3d,
        Condition::WeylRicciPointwiseHalf,
        Condition::WeylRicciYamabe,
        Condition::WeylRicciYamabeCn,
        Condition::WeylRicciYamabe4d,
        Condition::CurvatureIntegral4d,
        Condition::CurvatureIntegral4dT,
        Condition::Euler4d,
        Condition::Euler4dT,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Condition::WeylRicciPointwise => "weyl-ricci-pointwise",
            Condition::TracelessPointwise3d => "traceless-pointwise-3d",
            Condition::WeylRicciPointwiseHalf => "weyl-ricci-pointwise-half",
            Condition::WeylRicciYamabe => "weyl-ricci-yamabe",
            Condition::WeylRicciYamabeCn => "weyl-ricci-yamabe-cn",
            Condition::WeylRicciYamabe4d => "weyl-ricci-yamabe-4d",
            Condition::CurvatureIntegral4d => "curvature-integral-4d",
            Condition::CurvatureIntegral4dT => "curvature-integral-4d-t",
            Condition::Euler4d => "euler-4d",
            Condition::Euler4dT => "euler-4d-t",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.id() == id)
    }

    pub fn needs_yamabe(&self) -> bool {
        matches!(self, Condition::WeylRicciYamabe | Condition::WeylRicciYamabeCn | Condition::WeylRicciYamabe4d)
    }

    /// Whether `t` lies in the range the theorem is stated for.
    pub fn t_admissible(&self, n: usize, t: f64) -> bool {
        match self {
            Condition::WeylRicciPointwise => match n {
                3 => t < -5.0 / 12.0,
                4 => t < -1.0 / 3.0,
                _ => t <= -(n as f64) / (4.0 * (n as f64 - 1.0)),
            },
            Condition::TracelessPointwise3d => t < -5.0 / 12.0,
            Condition::WeylRicciPointwiseHalf => t == -0.5,
            Condition::WeylRicciYamabe | Condition::WeylRicciYamabeCn | Condition::CurvatureIntegral4d | Condition::Euler4d => {
                t <= -0.5
            }
            Condition::WeylRicciYamabe4d | Condition::CurvatureIntegral4dT | Condition::Euler4dT => {
                (-0.25..-1.0 / 6.0).contains(&t)
            }
        }
    }

    pub fn strict(&self) -> bool {
        matches!(
            self,
            Condition::WeylRicciPointwise
                | Condition::TracelessPointwise3d
                | Condition::WeylRicciYamabeCn
                | Condition::WeylRicciYamabe4d
        )
    }

    pub fn conclusion(&self, n: usize) -> Conclusion {
        match self {
            Condition::WeylRicciPointwise | Condition::WeylRicciPointwiseHalf => Conclusion::Einstein,
            Condition::WeylRicciYamabe if n >= 6 => Conclusion::Einstein,
            _ => Conclusion::ConstantCurvature,
        }
    }

    /// Whether the condition is stated in dimension `n`.
    pub fn applies_in(&self, n: usize) -> bool {
        match self {
            Condition::TracelessPointwise3d => n == 3,
            Condition::WeylRicciYamabeCn => n >= 6,
            Condition::WeylRicciYamabe4d
            | Condition::CurvatureIntegral4d
            | Condition::CurvatureIntegral4dT
            | Condition::Euler4d
            | Condition::Euler4dT => n == 4,
            _ => n >= 3,
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        let ok = self.applies_in(n);
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("condition {} does not apply in dimension {n}", self.id())))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conclusion {
    Einstein,
    ConstantCurvature,
}

impl Conclusion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Conclusion::Einstein => "einstein",
            Conclusion::ConstantCurvature => "constant-positive-sectional-curvature",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictStatus {
    Satisfied,
    NotSatisfied,
    /// Scalar curvature is not positive everywhere.
    Inapplicable,
    /// A Yamabe value is needed and none is available.
    Indeterminate,
}

impl VerdictStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictStatus::Satisfied => "satisfied",
            VerdictStatus::NotSatisfied => "not-satisfied",
            VerdictStatus::Inapplicable => "inapplicable",
            VerdictStatus::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PinchingVerdict {
    pub condition: Condition,
    pub t: f64,
    pub t_admissible: bool,
    /// Outcome of the inequality itself, regardless of the `t` range.
    pub status: VerdictStatus,
    /// Sides of the inequality: at the node of smallest margin for pointwise
    /// conditions, the integrals otherwise.
    pub lhs: f64,
    pub rhs: f64,
    /// `min(rhs − lhs)` over nodes, or `rhs − lhs`.
    pub margin: f64,
    /// Largest pointwise margin (existence of a strict point).
    pub max_margin: Option<f64>,
    /// The inequality holds and `t` is admissible.
    pub hypothesis_satisfied: bool,
    pub conclusion: Conclusion,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PinchingOptions {
    /// Relative slack separating equality from strict inequality.
    pub equality_tol: f64,
}

impl Default for PinchingOptions {
    fn default() -> Self {
        Self { equality_tol: 1e-12 }
    }
}

fn holds(margin: f64, scale: f64, strict: bool, opts: &PinchingOptions) -> bool {
    let slack = opts.equality_tol * scale.max(f64::MIN_POSITIVE);
    if strict {
        margin > slack
    } else {
        margin >= -slack
    }
}

/// `C_n`, defined for `n ≥ 4`.
pub fn constant_cn(n: usize) -> Result<f64> {
    let nf = n as f64;
    match n {
        0..=3 => Err(invalid("C_n is defined for n >= 4")),
        4 => Ok(1.0 / libm::sqrt(6.0)),
        5 => Ok((3.0 * libm::sqrt(15.0) - 6.0) / (8.0 * libm::sqrt(10.0))),
        _ => {
            let a = 2.0 * (nf - 2.0) / libm::sqrt(nf * (nf - 1.0));
            let b = (nf * nf - nf - 4.0) / libm::sqrt(nf * (nf - 1.0) * (nf + 1.0) * (nf - 2.0));
            Ok(2.0 / nf / (a + b))
        }
    }
}

/// `¼√((n−2)/(2(n−1)))`
pub fn yamabe_pinching_constant(n: usize) -> f64 {
    let nf = n as f64;
    0.25 * libm::sqrt((nf - 2.0) / (2.0 * (nf - 1.0)))
}

/// Both sides `(lhs, rhs)` of a pointwise condition from orthonormal-frame
/// invariants.
pub fn pointwise_sides(cond: Condition, inv: &Invariants, t: f64) -> Result<(f64, f64)> {
    let n = inv.dim;
    cond.check_dim(n)?;
    let nf = n as f64;
    let r = inv.scalar;
    match cond {
        Condition::WeylRicciPointwise => {
            let c = -libm::sqrt(2.0 / ((nf - 1.0) * (nf - 2.0))) * ((2.0 * (nf - 2.0) + 2.0 * nf * (nf - 1.0) * t) / nf + 1.0);
            Ok((inv.kn_minus, c * r))
        }
        Condition::TracelessPointwise3d => Ok((libm::sqrt(inv.traceless_sq), -(5.0 + 12.0 * t) / libm::sqrt(6.0) * r)),
        Condition::WeylRicciPointwiseHalf => {
            let c = (nf * nf - 3.0 * nf + 4.0) / (nf * libm::sqrt(2.0 * (nf - 1.0) * (nf - 2.0)));
            Ok((inv.kn_plus, c * r))
        }
        _ => Err(invalid(format!("{} is an integral condition", cond.id()))),
    }
}

fn pointwise(m: &Manifold, cond: Condition, t: f64, opts: &PinchingOptions) -> Result<PinchingVerdict> {
    let n = m.dim();
    cond.check_dim(n)?;
    if !t.is_finite() {
        return Err(invalid("t must be finite"));
    }
    let mut min_r = f64::INFINITY;
    let mut worst = (f64::INFINITY, 0.0, 0.0);
    let mut best = f64::NEG_INFINITY;
    let mut scale: f64 = 0.0;
    m.for_each_node(Depth::Pointwise, |d| {
        let (lhs, rhs) = pointwise_sides(cond, d.invariants, t)?;
        min_r = min_r.min(d.invariants.scalar);
        let margin = rhs - lhs;
        if !margin.is_finite() {
            return Err(Error::NonFinite(format!("{} margin", cond.id())));
        }
        if margin < worst.0 {
            worst = (margin, lhs, rhs);
        }
        best = best.max(margin);
        scale = scale.max(lhs.abs()).max(rhs.abs());
        Ok(())
    })?;
    let (margin, lhs, rhs) = worst;
    let status = if !(min_r > 0.0) {
        VerdictStatus::Inapplicable
    } else {
        let ok = if cond == Condition::WeylRicciPointwiseHalf {
            holds(margin, scale, false, opts) && holds(best, scale, true, opts)
        } else {
            holds(margin, scale, cond.strict(), opts)
        };
        if ok {
            VerdictStatus::Satisfied
        } else {
            VerdictStatus::NotSatisfied
        }
    };
    Ok(verdict(cond, n, t, status, lhs, rhs, margin, Some(best)))
}

#[allow(clippy::too_many_arguments)]
fn verdict(
    cond: Condition,
    n: usize,
    t: f64,
    status: VerdictStatus,
    lhs: f64,
    rhs: f64,
    margin: f64,
    max_margin: Option<f64>,
) -> PinchingVerdict {
    let t_admissible = cond.t_admissible(n, t);
    PinchingVerdict {
        condition: cond,
        t,
        t_admissible,
        status,
        lhs,
        rhs,
        margin,
        max_margin,
        hypothesis_satisfied: t_admissible && status == VerdictStatus::Satisfied,
        conclusion: cond.conclusion(n),
    }
}

/// Pointwise `|W − c R̊∘∧g|` pinching for critical metrics of `F_t`.
pub fn check_weyl_ricci_pointwise(m: &Manifold, t: f64) -> Result<PinchingVerdict> {
    pointwise(m, Condition::WeylRicciPointwise, t, &PinchingOptions::default())
}

/// Pointwise traceless Ricci pinching in dimension 3.
pub fn check_traceless_pointwise_3d(m: &Manifold, t: f64) -> Result<PinchingVerdict> {
    pointwise(m, Condition::TracelessPointwise3d, t, &PinchingOptions::default())
}

/// Non-strict pointwise pinching at `t = −1/2` with a strict point.
pub fn check_weyl_ricci_pointwise_half(m: &Manifold) -> Result<PinchingVerdict> {
    pointwise(m, Condition::WeylRicciPointwiseHalf, -0.5, &PinchingOptions::default())
}

/// Any condition, with explicit options. Yamabe conditions use `yamabe`
/// when given and are indeterminate otherwise; `chi` feeds the Euler forms.
pub fn check_condition(
    m: &Manifold,
    cond: Condition,
    t: f64,
    yamabe: Option<f64>,
    chi: Option<i64>,
    opts: &PinchingOptions,
) -> Result<PinchingVerdict> {
    match cond {
        Condition::WeylRicciPointwise | Condition::TracelessPointwise3d | Condition::WeylRicciPointwiseHalf => {
            pointwise(m, cond, t, opts)
        }
        _ => integral(m, cond, t, yamabe, chi, opts),
    }
}

/// Integrals shared by the integral conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureIntegrals {
    pub dim: usize,
    pub volume: f64,
    pub min_scalar: f64,
    /// `∫R²`
    pub scalar_sq: f64,
    /// `∫|W|²`
    pub weyl_sq: f64,
    /// `∫|R̊|²`
    pub traceless_sq: f64,
    /// `∫|W + (√2/(√n(n−2))) R̊∘∧g|^{n/2}`
    pub kn_plus_pow: f64,
}

pub fn curvature_integrals(m: &Manifold) -> Result<CurvatureIntegrals> {
    let n = m.dim();
    let half = n as f64 / 2.0;
    let mut min_scalar = f64::INFINITY;
    let [volume, scalar_sq, weyl_sq, traceless_sq, kn_plus_pow] = m.integrate_many(Depth::Pointwise, |d| {
        let i = d.invariants;
        min_scalar = min_scalar.min(i.scalar);
        [1.0, i.scalar * i.scalar, i.weyl_sq, i.traceless_sq, libm::pow(i.kn_plus, half)]
    })?;
    Ok(CurvatureIntegrals { dim: n, volume, min_scalar, scalar_sq, weyl_sq, traceless_sq, kn_plus_pow })
}

/// Both sides of an integral condition.
pub fn integral_sides(cond: Condition, ci: &CurvatureIntegrals, t: f64, yamabe: Option<f64>, chi: Option<i64>) -> Result<Option<(f64, f64)>> {
    let n = ci.dim;
    cond.check_dim(n)?;
    let nf = n as f64;
    let s = (1.0 + 6.0 * t) * (1.0 + 6.0 * t);
    let kn = libm::pow(ci.kn_plus_pow, 2.0 / nf);
    let need_chi = || chi.ok_or_else(|| invalid(format!("{} needs the Euler characteristic", cond.id()))).map(|c| c as f64);
    Ok(match cond {
        Condition::WeylRicciYamabe => yamabe.map(|y| (kn, yamabe_pinching_constant(n) * y)),
        Condition::WeylRicciYamabeCn => {
            let c = constant_cn(n)?;
            yamabe.map(|y| (kn, c * y))
        }
        Condition::WeylRicciYamabe4d => yamabe.map(|y| (kn, -(1.0 + 6.0 * t) / (2.0 * libm::sqrt(3.0)) * y)),
        Condition::CurvatureIntegral4d => Some((ci.weyl_sq + 1.25 * ci.traceless_sq, ci.scalar_sq / 48.0)),
        Condition::CurvatureIntegral4dT => Some((ci.weyl_sq + (1.0 + s) * ci.traceless_sq, s / 12.0 * ci.scalar_sq)),
        Condition::Euler4d => Some((6.5 * ci.weyl_sq + ci.scalar_sq / 3.0, 80.0 * PI * PI * need_chi()?)),
        Condition::Euler4dT => {
            Some(((3.0 + s) / 2.0 * ci.weyl_sq + ci.scalar_sq / 12.0, 16.0 * (1.0 + s) * PI * PI * need_chi()?))
        }
        _ => return Err(invalid(format!("{} is a pointwise condition", cond.id()))),
    })
}

fn integral(
    m: &Manifold,
    cond: Condition,
    t: f64,
    yamabe: Option<f64>,
    chi: Option<i64>,
    opts: &PinchingOptions,
) -> Result<PinchingVerdict> {
    cond.check_dim(m.dim())?;
    if !t.is_finite() {
        return Err(invalid("t must be finite"));
    }
    let ci = curvature_integrals(m)?;
    integral_verdict(&ci, cond, t, yamabe, chi, opts)
}

fn integral_verdict(
    ci: &CurvatureIntegrals,
    cond: Condition,
    t: f64,
    yamabe: Option<f64>,
    chi: Option<i64>,
    opts: &PinchingOptions,
) -> Result<PinchingVerdict> {
    let n = ci.dim;
    match integral_sides(cond, ci, t, yamabe, chi)? {
        None => Ok(verdict(cond, n, t, VerdictStatus::Indeterminate, f64::NAN, f64::NAN, f64::NAN, None)),
        Some((lhs, rhs)) => {
            let margin = rhs - lhs;
            let status = if !(ci.min_scalar > 0.0) {
                VerdictStatus::Inapplicable
            } else if holds(margin, lhs.abs().max(rhs.abs()), cond.strict(), opts) {
                VerdictStatus::Satisfied
            } else {
                VerdictStatus::NotSatisfied
            };
            Ok(verdict(cond, n, t, status, lhs, rhs, margin, None))
        }
    }
}

/// Integral Yamabe pinching for `t ≤ −1/2`, plus the `C_n` variant in
/// dimension `n ≥ 6`.
pub fn check_weyl_ricci_yamabe(m: &Manifold, t: f64, yamabe: Option<f64>) -> Result<Vec<PinchingVerdict>> {
    let ci = curvature_integrals(m)?;
    let opts = PinchingOptions::default();
    let mut out = vec![integral_verdict(&ci, Condition::WeylRicciYamabe, t, yamabe, None, &opts)?];
    if ci.dim >= 6 {
        out.push(integral_verdict(&ci, Condition::WeylRicciYamabeCn, t, yamabe, None, &opts)?);
    }
    Ok(out)
}

/// Integral Yamabe pinching in dimension 4 for `−1/4 ≤ t < −1/6`.
pub fn check_weyl_ricci_yamabe_4d(m: &Manifold, t: f64, yamabe: Option<f64>) -> Result<PinchingVerdict> {
    integral(m, Condition::WeylRicciYamabe4d, t, yamabe, None, &PinchingOptions::default())
}

/// The four-dimensional integral corollaries and their Euler-characteristic
/// forms (the latter only when `χ` is known).
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralCorollaries {
    pub verdicts: Vec<PinchingVerdict>,
    /// `margin(curvature-integral-4d) − margin(euler-4d)/4`, zero by
    /// Gauss–Bonnet.
    pub euler_equivalence: Option<f64>,
    /// `margin(curvature-integral-4d-t) − margin(euler-4d-t)`.
    pub euler_equivalence_t: Option<f64>,
}

pub fn check_integral_corollaries(m: &Manifold, t: f64, chi: Option<i64>) -> Result<IntegralCorollaries> {
    if m.dim() != 4 {
        return Err(invalid("the integral corollaries are four-dimensional"));
    }
    let ci = curvature_integrals(m)?;
    let chi = chi.or_else(|| m.euler_characteristic());
    let opts = PinchingOptions::default();
    let a = integral_verdict(&ci, Condition::CurvatureIntegral4d, t, None, chi, &opts)?;
    let b = integral_verdict(&ci, Condition::CurvatureIntegral4dT, t, None, chi, &opts)?;
    let mut verdicts = vec![a.clone(), b.clone()];
    let (mut eq, mut eq_t) = (None, None);
    if chi.is_some() {
        let c = integral_verdict(&ci, Condition::Euler4d, t, None, chi, &opts)?;
        let d = integral_verdict(&ci, Condition::Euler4dT, t, None, chi, &opts)?;
        eq = Some(a.margin - c.margin / 4.0);
        eq_t = Some(b.margin - d.margin);
        verdicts.push(c);
        verdicts.push(d);
    }
    Ok(IntegralCorollaries { verdicts, euler_equivalence: eq, euler_equivalence_t: eq_t })
}

/// Yamabe invariant bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct YamabeEstimate {
    /// Minimum of the Yamabe quotient over the trial family.
    pub upper: f64,
    /// Trial coefficients at the minimum (constant first).
    pub trial: Vec<f64>,
    /// `(∫(R² − 12|R̊|²))^{1/2}` in dimension 4, clamped at zero.
    pub lower_4d: Option<f64>,
    pub lower_4d_clamped: bool,
    /// `n(n−1)·Vol(S^n(1))^{2/n}` on round spheres.
    pub known_exact: Option<f64>,
}

impl YamabeEstimate {
    /// `lower_4d ≤ known_exact ≤ upper` for the values present, with a
    /// relative slack.
    pub fn ordering_holds(&self, rel_tol: f64) -> bool {
        let le = |a: f64, b: f64| a <= b + rel_tol * a.abs().max(b.abs());
        let mut vals = Vec::new();
        if let Some(l) = self.lower_4d {
            vals.push(l);
        }
        if let Some(k) = self.known_exact {
            vals.push(k);
        }
        vals.push(self.upper);
        vals.windows(2).all(|w| le(w[0], w[1]))
    }

    /// The value used by the Yamabe conditions: the exact invariant when
    /// known, else an unclamped lower bound. Using a lower bound keeps a
    /// satisfied verdict sound.
    pub fn usable(&self) -> Option<f64> {
        self.known_exact.or(if self.lower_4d_clamped { None } else { self.lower_4d })
    }
}

/// Yamabe invariant of the round sphere `S^n`.
pub fn round_sphere_yamabe(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf - 1.0) * libm::pow(sphere_volume(n, 1.0), 2.0 / nf)
}

/// `Y² ≥ ∫(R² − 12|R̊|²)` in dimension 4; returns the root and whether the
/// integral was negative.
pub fn yamabe_lower_bound_4d(m: &Manifold) -> Result<(f64, bool)> {
    if m.dim() != 4 {
        return Err(invalid("the Yamabe lower bound is four-dimensional"));
    }
    let v = m.integrate(Depth::Pointwise, |i| i.scalar * i.scalar - 12.0 * i.traceless_sq)?;
    Ok(if v < 0.0 { (0.0, true) } else { (libm::sqrt(v), false) })
}

struct TrialData {
    n: usize,
    /// `∫ g(∇φ_a, ∇φ_b)`
    dirichlet: DMatrix<f64>,
    /// `∫ R φ_a φ_b`
    potential: DMatrix<f64>,
    weights: Vec<f64>,
    /// Node values of the trial functions, one row per node.
    values: Vec<Vec<f64>>,
}

impl TrialData {
    fn new(m: &Manifold) -> Result<Self> {
        let n = m.dim();
        let nodes = m.nodes()?;
        if m.is_homogeneous() {
            let inv = m.curvature_bundle(&nodes[0].point)?.invariants()?;
            let w = nodes[0].weight;
            return Ok(Self {
                n,
                dirichlet: DMatrix::zeros(1, 1),
                potential: DMatrix::from_element(1, 1, w * inv.scalar),
                weights: vec![w],
                values: vec![vec![1.0]],
            });
        }
        let k = 1 + m.low_modes(&nodes[0].point).len();
        let mut dirichlet = DMatrix::zeros(k, k);
        let mut potential = DMatrix::zeros(k, k);
        let mut weights = Vec::with_capacity(nodes.len());
        let mut values = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let pc = m.point_curvature(&node.point)?;
            let mut phi = vec![1.0];
            phi.extend(m.low_modes(&node.point));
            let h = vec![1e-4; n];
            let p = node.point.clone();
            let d = crate::fd::partials(&node.point.x, &h, false, |x| {
                let mut q = p.clone();
                q.x = x.to_vec();
                Ok(m.low_modes(&q))
            })?;
            // gradient rows for the non-constant modes
            for a in 1..k {
                for b in a..k {
                    let mut s = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            s += pc.g_inv[(i, j)] * d.first[i][a - 1] * d.first[j][b - 1];
                        }
                    }
                    dirichlet[(a, b)] += node.weight * s;
                    if a != b {
                        dirichlet[(b, a)] += node.weight * s;
                    }
                }
            }
            for a in 0..k {
                for b in 0..k {
                    potential[(a, b)] += node.weight * pc.scalar * phi[a] * phi[b];
                }
            }
            weights.push(node.weight);
            values.push(phi);
        }
        Ok(Self { n, dirichlet, potential, weights, values })
    }

    fn quotient(&self, c: &[f64]) -> f64 {
        let nf = self.n as f64;
        let cv = nalgebra::DVector::from_column_slice(c);
        let num = 4.0 * (nf - 1.0) / (nf - 2.0) * cv.dot(&(&self.dirichlet * &cv)) + cv.dot(&(&self.potential * &cv));
        let p = 2.0 * nf / (nf - 2.0);
        let mut den = 0.0;
        for (w, phi) in self.weights.iter().zip(&self.values) {
            let u: f64 = phi.iter().zip(c).map(|(a, b)| a * b).sum();
            den += w * libm::pow(u.abs(), p);
        }
        num / libm::pow(den, (nf - 2.0) / nf)
    }
}

/// The Yamabe quotient
/// `(4(n−1)/(n−2))·[∫|∇u|² + ((n−2)/(4(n−1)))∫Ru²] / (∫|u|^{2n/(n−2)})^{(n−2)/n}`
/// for `u = c₀ + Σ c_a φ_a` over the manifold's low modes.
pub fn yamabe_quotient(m: &Manifold, coefficients: &[f64]) -> Result<f64> {
    if m.dim() < 3 {
        return Err(invalid("the Yamabe quotient needs n >= 3"));
    }
    let data = TrialData::new(m)?;
    if coefficients.len() != data.values[0].len() {
        return Err(Error::DimensionMismatch { expected: data.values[0].len(), found: coefficients.len() });
    }
    Ok(data.quotient(coefficients))
}

/// Upper bound for the Yamabe invariant: the quotient minimized over
/// constants plus low modes by projected gradient descent from `u ≡ 1`.
pub fn yamabe_upper_bound(m: &Manifold, opts: &SearchOptions) -> Result<(f64, Vec<f64>)> {
    if m.dim() < 3 {
        return Err(invalid("the Yamabe quotient needs n >= 3"));
    }
    let data = TrialData::new(m)?;
    let k = data.values[0].len();
    let mut x0 = vec![0.0; k];
    x0[0] = 1.0;
    if k == 1 {
        return Ok((data.quotient(&x0), x0));
    }
    let unit = |c: &[f64]| -> Result<Vec<f64>> {
        let s = libm::sqrt(c.iter().map(|v| v * v).sum::<f64>());
        if !(s > 0.0) {
            return Err(Error::NonFinite("trial coefficients vanished".into()));
        }
        Ok(c.iter().map(|v| v / s).collect())
    };
    let mut q = |c: &[f64]| Ok(data.quotient(c));
    let min = minimize(
        |c| Ok(data.quotient(c)),
        |c| fd_gradient(&mut q, c, opts.gradient_step),
        unit,
        &x0,
        &vec![(-2.0, 2.0); k],
        opts,
    )?;
    if min.status == SearchStatus::Boundary {
        return Err(Error::NonFinite("trial search left the coefficient box".into()));
    }
    Ok((min.value, min.x))
}

pub fn yamabe_estimate(m: &Manifold) -> Result<YamabeEstimate> {
    let opts = SearchOptions { max_iterations: 100, gradient_tol: 1e-8, gradient_step: 1e-4, ..Default::default() };
    let (upper, trial) = yamabe_upper_bound(m, &opts)?;
    let (lower_4d, lower_4d_clamped) = if m.dim() == 4 {
        let (v, c) = yamabe_lower_bound_4d(m)?;
        (Some(v), c)
    } else {
        (None, false)
    };
    Ok(YamabeEstimate { upper, trial, lower_4d, lower_4d_clamped, known_exact: m.round_sphere_dim().map(round_sphere_yamabe) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditStatus {
    Pass,
    Fail,
    Warn,
}

impl AuditStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            AuditStatus::Pass => "PASS",
            AuditStatus::Fail => "FAIL",
            AuditStatus::Warn => "WARN",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditLine {
    pub label: &'static str,
    pub statement: &'static str,
    pub status: AuditStatus,
    pub samples: usize,
    /// Smallest `rhs − lhs` over the samples (largest defect for identities).
    pub worst: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsAudit {
    pub lines: Vec<AuditLine>,
    /// Sampled sub-interval of `[−1/4, −1/6)` on which `α(t) > 1/2`.
    pub alpha_interval: Option<(f64, f64)>,
}

impl ConstantsAudit {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.status != AuditStatus::Fail)
    }
}

/// `α(t) = (1 − √(1 + 2(1+6t))) / (−2(1+6t))`
pub fn alpha_choice(t: f64) -> f64 {
    let s = 1.0 + 6.0 * t;
    (1.0 - libm::sqrt(1.0 + 2.0 * s)) / (-2.0 * s)
}

/// `α(1+6t)/3 + (1/6)(2 − 1/α)`, zero for the chosen `α`.
pub fn alpha_identity(t: f64, alpha: f64) -> f64 {
    alpha * (1.0 + 6.0 * t) / 3.0 + (2.0 - 1.0 / alpha) / 6.0
}

/// Grid `lo, lo+step, …` strictly below `hi`.
fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let t = lo + k as f64 * step;
        if t >= hi - 1e-12 * step {
            break;
        }
        out.push(t);
        k += 1;
    }
    out
}

fn strict_line(label: &'static str, statement: &'static str, margins: &[(f64, f64)]) -> AuditLine {
    let (worst_at, worst) = margins.iter().copied().fold((f64::NAN, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let status = if worst > 0.0 { AuditStatus::Pass } else { AuditStatus::Fail };
    AuditLine {
        label,
        statement,
        status,
        samples: margins.len(),
        worst,
        detail: format!("smallest margin {worst:e} at {worst_at}"),
    }
}

/// Checks the numerical inequalities between constants used in the proofs.
pub fn constants_audit() -> ConstantsAudit {
    let mut lines = Vec::new();
    let ns = |lo: usize, hi: usize| (lo..=hi).map(|n| n as f64).collect::<Vec<_>>();

    let m: Vec<(f64, f64)> = ns(3, 64).into_iter().map(|n| (n, 0.5 - (n + 8.0) * (n - 2.0) / (8.0 * n * (n - 1.0)))).collect();
    lines.push(strict_line("ricci-coefficient", "(n+8)(n-2)/(8n(n-1)) < 1/2, 3 <= n <= 64", &m));

    let m: Vec<(f64, f64)> = [4usize, 5]
        .iter()
        .map(|&n| (n as f64, constant_cn(n).unwrap_or(f64::NAN) - yamabe_pinching_constant(n)))
        .collect();
    lines.push(strict_line("cn-above-pinching", "1/4 sqrt((n-2)/(2(n-1))) < C_n, n in {4, 5}", &m));

    let m: Vec<(f64, f64)> =
        (6..=64).map(|n| (n as f64, yamabe_pinching_constant(n) - constant_cn(n).unwrap_or(f64::NAN))).collect();
    lines.push(strict_line("cn-below-pinching", "C_n < 1/4 sqrt((n-2)/(2(n-1))), 6 <= n <= 64", &m));

    let ts = grid(-0.25, -1.0 / 6.0, 1e-3);
    let m: Vec<(f64, f64)> =
        ts.iter().map(|&t| (t, 1.0 / libm::sqrt(6.0) + (1.0 + 6.0 * t) / (2.0 * libm::sqrt(3.0)))).collect();
    lines.push(strict_line("yamabe-4d-coefficient", "-(1+6t)/(2 sqrt 3) < 1/sqrt 6, t in [-1/4, -1/6)", &m));

    let ts_low = grid(-10.0, -0.5, 1e-3);
    let m: Vec<(f64, f64)> = ts_low
        .iter()
        .map(|&t| (t, -(5.0 + 12.0 * t) / libm::sqrt(6.0) + (1.0 + 6.0 * t) / (2.0 * libm::sqrt(6.0))))
        .collect();
    lines.push(strict_line("traceless-3d-improvement", "-(1+6t)/(2 sqrt 6) < -(5+12t)/sqrt 6, t in [-10, -1/2)", &m));

    // α choice on the admissible interval
    let mut above = Vec::new();
    let mut worst_identity: f64 = 0.0;
    for &t in &ts {
        let a = alpha_choice(t);
        if a > 0.5 {
            above.push(t);
            worst_identity = worst_identity.max(alpha_identity(t, a).abs());
        }
    }
    let alpha_interval = match (above.first(), above.last()) {
        (Some(&a), Some(&b)) => Some((a, b)),
        _ => None,
    };
    lines.push(AuditLine {
        label: "alpha-identity",
        statement: "alpha(1+6t)/3 + (2 - 1/alpha)/6 = 0 where alpha > 1/2",
        status: if worst_identity <= 1e-12 && !above.is_empty() { AuditStatus::Pass } else { AuditStatus::Fail },
        samples: above.len(),
        worst: worst_identity,
        detail: format!("largest |identity| {worst_identity:e} over {} samples", above.len()),
    });
    let below: Vec<f64> = ts.iter().copied().filter(|&t| !(alpha_choice(t) > 0.5)).collect();
    let worst_alpha = ts.iter().map(|&t| alpha_choice(t) - 0.5).fold(f64::INFINITY, f64::min);
    lines.push(AuditLine {
        label: "alpha-above-half",
        statement: "alpha(t) > 1/2 on [-1/4, -1/6)",
        status: if below.is_empty() { AuditStatus::Pass } else { AuditStatus::Warn },
        samples: ts.len(),
        worst: worst_alpha,
        detail: match alpha_interval {
            Some((a, b)) => format!("alpha > 1/2 on sampled [{a}, {b}]; {} samples below", below.len()),
            None => "alpha <= 1/2 at every sample".into(),
        },
    });
    let a0 = alpha_choice(-0.25);
    lines.push(AuditLine {
        label: "alpha-endpoint",
        statement: "alpha(-1/4) > 1/2",
        status: if a0 > 0.5 { AuditStatus::Pass } else { AuditStatus::Warn },
        samples: 1,
        worst: a0 - 0.5,
        detail: format!("alpha(-1/4) = {a0}"),
    });
    ConstantsAudit { lines, alpha_interval }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cn_values() {
        assert!((constant_cn(4).unwrap() - 0.408_248_290_463_863).abs() < 1e-12);
        assert!((constant_cn(5).unwrap() - 0.222_108_502_259_217_5).abs() < 1e-12);
        assert!((constant_cn(6).unwrap() - 0.141_382_000_600_275_2).abs() < 1e-12);
        assert!(constant_cn(3).is_err());
    }

    #[test]
    fn round_s3_pointwise_margins() {
        let m = Manifold::round_sphere(3, 1.0).unwrap();
        let v = check_weyl_ricci_pointwise(&m, -0.5).unwrap();
        assert!((v.margin - 2.0).abs() < 1e-12);
        assert!(v.hypothesis_satisfied);
        let v = check_weyl_ricci_pointwise(&m, -5.0 / 12.0).unwrap();
        assert!(v.margin.abs() < 1e-12);
        assert!(!v.t_admissible && !v.hypothesis_satisfied);
        let v = check_traceless_pointwise_3d(&m, -0.5).unwrap();
        assert!((v.margin - libm::sqrt(6.0)).abs() < 1e-12);
    }

    #[test]
    fn torus_is_inapplicable() {
        let m = Manifold::flat_torus(&[1.0; 4]).unwrap();
        let c = check_integral_corollaries(&m, -0.5, None).unwrap();
        assert!(c.verdicts.iter().all(|v| v.status == VerdictStatus::Inapplicable));
    }

    #[test]
    fn alpha_at_interval_ends() {
        assert!((alpha_choice(-0.25) - 1.0).abs() < 1e-15);
        assert!(alpha_choice(-1.0 / 6.0 - 1e-6) > 0.5);
        assert!(alpha_identity(-0.2, alpha_choice(-0.2)).abs() < 1e-15);
    }
}
