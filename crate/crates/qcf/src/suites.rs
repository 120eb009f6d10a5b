//! Property suites behind `qcf verify`.

use std::fmt;

use qcf_core::algebra::{estimate_sweep, EstimateSweep};
use qcf_core::functional::{
    bochner_check, evaluate_functional, gauss_bonnet_4d, kato_check, traceless_gradient_balance,
};
use qcf_core::identities::identity_sweep;
use qcf_core::oracle::{derived_values, OracleRecord};
use qcf_core::rigidity::{
    check_traceless_pointwise_3d, check_weyl_ricci_pointwise, check_weyl_ricci_pointwise_half, constants_audit,
    round_sphere_yamabe, yamabe_lower_bound_4d, AuditStatus,
};
use qcf_core::tensor::{curvature_symmetry_defect, random_curvature_tensor, weyl_part, SymmetricBilinear};
use qcf_core::{AmbientForm, Depth, Manifold, Result};
use serde_json::{json, Value};

use crate::format::num;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Identities,
    Constants,
    GaussBonnet,
    Oracles,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Algebra, Suite::Identities, Suite::Constants, Suite::GaussBonnet, Suite::Oracles];

    pub fn tag(&self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Identities => "identities",
            Suite::Constants => "constants",
            Suite::GaussBonnet => "gauss-bonnet",
            Suite::Oracles => "oracles",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.tag() == tag)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Warn,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Warn => "WARN",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    /// Measured quantity (a defect, count or margin; see `detail`).
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        let outcome = if value <= tolerance { Outcome::Pass } else { Outcome::Fail };
        Self { name: name.into(), outcome, value, tolerance, detail: detail.into() }
    }

    /// Passes when `value > threshold`.
    fn above(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        let outcome = if value > threshold { Outcome::Pass } else { Outcome::Fail };
        Self { name: name.into(), outcome, value, tolerance: threshold, detail: detail.into() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "outcome": self.outcome.as_str(),
            "value": num(self.value),
            "tolerance": num(self.tolerance),
            "detail": self.detail,
        })
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} value={:e} tol={:e} {}", self.outcome.as_str(), self.name, self.value, self.tolerance, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn count(&self, o: Outcome) -> usize {
        self.checks.iter().filter(|c| c.outcome == o).count()
    }

    pub fn passed(&self) -> bool {
        self.count(Outcome::Fail) == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite.tag(),
            "passed": self.passed(),
            "counts": {
                "pass": self.count(Outcome::Pass),
                "warn": self.count(Outcome::Warn),
                "fail": self.count(Outcome::Fail),
            },
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    /// Random draws per dimension in the algebra suite.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0 }
    }
}

pub fn run(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Algebra => algebra(opts)?,
        Suite::Identities => identities()?,
        Suite::Constants => constants(),
        Suite::GaussBonnet => gauss_bonnet()?,
        Suite::Oracles => oracles()?,
    };
    Ok(SuiteReport { suite, checks })
}

/// Relative tolerance of the norm-splitting identity.
pub const SPLIT_TOL: f64 = 1e-10;

/// Algebra sweeps for `n = 3..=8`, one thread per dimension.
pub fn algebra_sweeps(samples: usize, seed: u64) -> Result<Vec<EstimateSweep>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = (3..=8).map(|n| s.spawn(move || estimate_sweep(n, samples, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep thread panicked")).collect()
    })
}

fn algebra(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for s in algebra_sweeps(opts.samples, opts.seed)? {
        out.push(Check::at_most(
            format!("estimate-n{}", s.dim),
            s.violations as f64,
            0.0,
            format!("{} draws, largest lhs/rhs {:.6}", s.samples, s.max_ratio),
        ));
        out.push(Check::at_most(
            format!("kn-split-n{}", s.dim),
            s.max_split_error,
            SPLIT_TOL,
            "largest relative error of |W + (λ/√(2n)) R̊∘∧g|² = |W|² + (2(n−2)λ²/n)|R̊|²",
        ));
    }
    let mut worst = 0.0f64;
    for n in 3..=6 {
        for seed in 0..1000u64 {
            let r = random_curvature_tensor(n, opts.seed.wrapping_add(seed))?;
            worst = worst.max(curvature_symmetry_defect(r.tensor()).max());
        }
    }
    out.push(Check::at_most("curvature-symmetries", worst, 1e-12, "1000 random tensors for each n in 3..=6"));
    let mut weyl3 = 0.0f64;
    for seed in 0..1000u64 {
        let r = random_curvature_tensor(3, opts.seed.wrapping_add(seed))?;
        let w = weyl_part(r.tensor(), &SymmetricBilinear::identity(3))?;
        weyl3 = weyl3.max(w.max_abs() / r.tensor().max_abs().max(f64::MIN_POSITIVE));
    }
    out.push(Check::at_most("weyl-vanishes-3d", weyl3, 1e-12, "relative sup of the Weyl part over 1000 tensors"));
    Ok(out)
}

/// Manifolds used by the identity suite, with their short names.
pub fn identity_corpus() -> Result<Vec<(&'static str, Manifold)>> {
    Ok(vec![
        ("round_sphere(3,1)", Manifold::round_sphere(3, 1.0)?),
        ("round_sphere(4,1)", Manifold::round_sphere(4, 1.0)?),
        ("product_spheres(2,1,2,1)", Manifold::product_spheres(2, 1.0, 2, 1.0)?),
        ("flat_torus(4)", Manifold::flat_torus(&[1.0; 4])?),
        ("berger_sphere(2,1,1)", Manifold::berger_sphere(2.0, 1.0, 1.0)?),
        ("berger_chart(2,1,1)", Manifold::sphere_chart(3, AmbientForm::Berger { lambda: [2.0, 1.0, 1.0] })?.with_resolution(8)?),
        ("perturbed_sphere(3,0.05,2)", Manifold::perturbed_sphere(3, 0.05, 2)?.with_resolution(8)?),
        ("perturbed_sphere(4,0.05,2)", Manifold::perturbed_sphere(4, 0.05, 2)?.with_resolution(6)?),
    ])
}

/// Einstein presets used for the Euler–Lagrange residual checks.
pub fn einstein_corpus() -> Result<Vec<(&'static str, Manifold)>> {
    Ok(vec![
        ("round_sphere(3,1)", Manifold::round_sphere(3, 1.0)?),
        ("round_sphere(4,1)", Manifold::round_sphere(4, 1.0)?),
        ("round_sphere(5,1)", Manifold::round_sphere(5, 1.0)?),
        ("product_spheres(2,1,2,1)", Manifold::product_spheres(2, 1.0, 2, 1.0)?),
        ("flat_torus(4)", Manifold::flat_torus(&[1.0; 4])?),
    ])
}

pub const CRITICAL_T: [f64; 5] = [-1.0, -0.5, -1.0 / 3.0, 0.0, 1.0];

fn identities() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, m) in identity_corpus()? {
        let s = identity_sweep(&m)?;
        if m.dim() == 3 {
            out.push(Check::at_most(format!("weyl-zero-3d {name}"), s.weyl_sup, 1e-9, "sup |W|"));
        }
        out.push(Check::at_most(format!("weyl-trace-free {name}"), s.weyl_trace_sup, 1e-9, "sup of all Weyl traces"));
        out.push(Check::at_most(format!("traceless-trace {name}"), s.traceless_trace_sup, 1e-9, "sup |tr R̊|"));
        out.push(Check::at_most(
            format!("cotton-forms {name}"),
            s.cotton_forms_sup,
            1e-9,
            format!("Ricci vs traceless-Ricci form, sup |C| = {:.3e}", s.cotton_sup),
        ));
        if !m.is_homogeneous() {
            out.push(Check::at_most(
                format!("contracted-bianchi {name}"),
                s.contracted_bianchi_sup,
                1e-6,
                format!("sup |R̊_ij,j − (n−2)/(2n) R_,i|, sup |∇R| = {:.3e}", s.scalar_grad_sup),
            ));
        }
        if m.dim() >= 4 {
            out.push(Check::at_most(
                format!("weyl-divergence {name}"),
                s.weyl_divergence_sup,
                1e-5,
                "sup |W_ijkl,l + (n−3)/(n−2) C_ijk|",
            ));
        }
    }

    let berger = Manifold::berger_sphere(2.0, 1.0, 1.0)?;
    let b = traceless_gradient_balance(&berger)?;
    out.push(Check::at_most("traceless-gradient-balance berger_sphere(2,1,1)", b.balance.abs(), 1e-8, format!("∫|∇R̊|² = {:.6e}", b.lhs)));
    let levels = [6usize, 8, 12];
    let mut balances = Vec::new();
    for &r in &levels {
        let m = Manifold::perturbed_sphere(3, 0.05, 2)?.with_resolution(r)?;
        balances.push(traceless_gradient_balance(&m)?.balance.abs());
    }
    out.push(Check::at_most(
        "traceless-gradient-balance perturbed_sphere(3,0.05,2)",
        *balances.last().unwrap(),
        1e-4,
        format!("resolution {:?}: {:?}", levels, balances.iter().map(|b| format!("{b:.3e}")).collect::<Vec<_>>()),
    ));
    let converging = balances.windows(2).all(|w| w[1] < w[0]);
    out.push(Check {
        name: "traceless-gradient-balance refinement".into(),
        outcome: if converging { Outcome::Pass } else { Outcome::Fail },
        value: balances[0] / balances[balances.len() - 1],
        tolerance: 1.0,
        detail: "balance decreases strictly under refinement (value = coarse/fine ratio)".into(),
    });

    for (name, m) in einstein_corpus()? {
        let mut worst = 0.0f64;
        for t in CRITICAL_T {
            let r = evaluate_functional(&m, t)?;
            worst = worst.max(r.el_residual_sup).max(r.trace_residual_sup);
        }
        out.push(Check::at_most(format!("el-residual {name}"), worst, 1e-8, "sup of both defects over t ∈ {−1, −1/2, −1/3, 0, 1}"));
    }
    let r = evaluate_functional(&berger, -0.5)?;
    out.push(Check::above("el-residual berger_sphere(2,1,1) non-critical", r.el_residual_sup, 1e-3, "tensor defect at t = −1/2"));

    let pert = Manifold::perturbed_sphere(3, 0.05, 2)?.with_resolution(6)?;
    let bo = bochner_check(&pert, -0.5)?;
    out.push(Check::at_most("bochner perturbed_sphere(3,0.05,2)", bo.generic, 1e-6, "sup |½Δ|R̊|² − |∇R̊|² − R̊·ΔR̊|"));
    out.push(Check::at_most("bochner-curvature-terms perturbed_sphere(3,0.05,2)", bo.algebraic, 1e-9, "Riemann vs Weyl form of the curvature terms"));
    for (name, m) in [("berger_sphere(2,1,1)", berger.clone()), ("perturbed_sphere(3,0.05,2)", pert)] {
        let k = kato_check(&m)?;
        out.push(Check::at_most(
            format!("kato {name}"),
            k.violations as f64,
            0.0,
            format!("{} nodes with R̊ ≠ 0, max(|∇|R̊|| − |∇R̊|) = {:.3e}", k.checked_nodes, k.max_excess),
        ));
    }
    Ok(out)
}

fn constants() -> Vec<Check> {
    let audit = constants_audit();
    audit
        .lines
        .iter()
        .map(|l| Check {
            name: l.label.to_string(),
            outcome: match l.status {
                AuditStatus::Pass => Outcome::Pass,
                AuditStatus::Fail => Outcome::Fail,
                AuditStatus::Warn => Outcome::Warn,
            },
            value: l.worst,
            tolerance: 0.0,
            detail: format!("{}; {} samples; {}", l.statement, l.samples, l.detail),
        })
        .collect()
}

/// `(name, manifold, χ)` for the Gauss–Bonnet suite.
pub fn gauss_bonnet_corpus() -> Result<Vec<(&'static str, Manifold, i64)>> {
    Ok(vec![
        ("round_sphere(4,1)", Manifold::round_sphere(4, 1.0)?, 2),
        ("product_spheres(2,1,2,1)", Manifold::product_spheres(2, 1.0, 2, 1.0)?, 4),
        ("flat_torus(4)", Manifold::flat_torus(&[1.0; 4])?, 0),
        ("perturbed_sphere(4,0.05,2)", Manifold::perturbed_sphere(4, 0.05, 2)?.with_resolution(8)?, 2),
    ])
}

/// Relative Gauss–Bonnet tolerance; absolute when `χ = 0`.
pub const GB_REL_TOL: f64 = 1e-3;
pub const GB_ABS_TOL: f64 = 1e-8;

fn gauss_bonnet() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, m, chi) in gauss_bonnet_corpus()? {
        let gb = gauss_bonnet_4d(&m, chi)?;
        let tol = if chi == 0 { GB_ABS_TOL } else { GB_REL_TOL };
        out.push(Check::at_most(
            format!("gauss-bonnet {name}"),
            gb.relative_error(),
            tol,
            format!("lhs {:.12e}, 32π²χ = {:.12e} (χ = {chi})", gb.lhs, gb.rhs),
        ));
    }
    Ok(out)
}

fn mean(m: &Manifold, f: impl FnMut(&qcf_core::curvature::Invariants) -> f64) -> Result<f64> {
    Ok(m.integrate(Depth::Pointwise, f)? / m.volume()?)
}

fn t_of(inputs: &str) -> Option<f64> {
    inputs.split(',').find_map(|kv| kv.trim().strip_prefix("t=")).and_then(|v| v.parse().ok())
}

/// The engine's value for an oracle record, computed through the main code paths.
pub fn engine_value(rec: &OracleRecord) -> Result<Option<f64>> {
    let s3 = || Manifold::round_sphere(3, 1.0);
    let s4 = || Manifold::round_sphere(4, 1.0);
    let s2s2 = || Manifold::product_spheres(2, 1.0, 2, 1.0);
    let berger = || Manifold::berger_sphere(2.0, 1.0, 1.0);
    let v = match rec.label.as_str() {
        "s3.scalar" => mean(&s3()?, |i| i.scalar)?,
        "s3.weyl_sq" => mean(&s3()?, |i| i.weyl_sq)?,
        "s4r2.scalar" => mean(&Manifold::round_sphere(4, 2.0)?, |i| i.scalar)?,
        "s4.scalar_sq_integral" => s4()?.integrate(Depth::Pointwise, |i| i.scalar * i.scalar)?,
        "s4.gauss_bonnet" => gauss_bonnet_4d(&s4()?, 2)?.lhs,
        "s4.yamabe" => round_sphere_yamabe(4),
        "s2xs2.scalar" => mean(&s2s2()?, |i| i.scalar)?,
        "s2xs2.weyl_sq" => mean(&s2s2()?, |i| i.weyl_sq)?,
        "s2xs2.traceless_sq" => mean(&s2s2()?, |i| i.traceless_sq)?,
        "s2xs2.volume" => s2s2()?.volume()?,
        "s2xs2.scalar_sq_integral" => s2s2()?.integrate(Depth::Pointwise, |i| i.scalar * i.scalar)?,
        "s2xs2.weyl_sq_integral" => s2s2()?.integrate(Depth::Pointwise, |i| i.weyl_sq)?,
        "s2xs2.yamabe_lower_4d" => yamabe_lower_bound_4d(&s2s2()?)?.0,
        "s2xs2.gauss_bonnet" => gauss_bonnet_4d(&s2s2()?, 4)?.lhs,
        "s2xs2_unequal.traceless_sq" => mean(&Manifold::product_spheres(2, 1.0, 2, 1.5)?, |i| i.traceless_sq)?,
        "s3.weyl_ricci_pointwise_margin" => match t_of(&rec.inputs) {
            Some(t) => check_weyl_ricci_pointwise(&s3()?, t)?.margin,
            None => return Ok(None),
        },
        "s3.traceless_pointwise_margin" => match t_of(&rec.inputs) {
            Some(t) => check_traceless_pointwise_3d(&s3()?, t)?.margin,
            None => return Ok(None),
        },
        "s4.weyl_ricci_half_margin" => check_weyl_ricci_pointwise_half(&s4()?)?.margin,
        "berger211.scalar" => mean(&berger()?, |i| i.scalar)?,
        "berger211.traceless_sq" => mean(&berger()?, |i| i.traceless_sq)?,
        "berger211.traceless_cubed" => mean(&berger()?, |i| i.traceless_cubed)?,
        "berger211.volume" => berger()?.volume()?,
        "berger211_unit.traceless_pointwise_margin" => {
            let b = berger()?;
            let c = b.volume()?.powf(-2.0 / 3.0);
            check_traceless_pointwise_3d(&b.scaled(c)?, -0.5)?.margin
        }
        "s3.volume_refined" => Manifold::sphere_chart(3, AmbientForm::Round { radius: 1.0 })?.volume()?,
        _ => return Ok(None),
    };
    Ok(Some(v))
}

/// Relative agreement required between an oracle and the engine.
pub fn oracle_tolerance(rec: &OracleRecord) -> f64 {
    rec.tolerance.max(1e-9)
}

fn oracles() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for rec in derived_values()? {
        match engine_value(&rec)? {
            Some(v) => {
                let err = (v - rec.value).abs() / rec.value.abs().max(1.0);
                out.push(Check::at_most(
                    format!("oracle {} [{}]", rec.label, rec.inputs),
                    err,
                    oracle_tolerance(&rec),
                    format!("{}: oracle {:.15e}, engine {:.15e}", rec.method.as_str(), rec.value, v),
                ));
            }
            None => out.push(Check {
                name: format!("oracle {} [{}]", rec.label, rec.inputs),
                outcome: Outcome::Fail,
                value: f64::NAN,
                tolerance: oracle_tolerance(&rec),
                detail: "no engine path for this record".into(),
            }),
        }
    }
    Ok(out)
}
