//! JSON payloads for each command and the CSV optimizer trace.

use std::io::Write;

use qcf_core::functional::{evaluate_functional, FunctionalReport, GaussBonnet};
use qcf_core::optimize::{SearchResult, TraceRow};
use qcf_core::rigidity::{PinchingVerdict, YamabeEstimate};
use qcf_core::{Depth, Manifold, Result};
use serde_json::{json, Value};

use crate::format::{nums, num, opt};

pub fn functional_json(r: &FunctionalReport) -> Value {
    json!({
        "t": num(r.t),
        "value_ft": num(r.value_ft),
        "value_eh": num(r.value_eh),
        "volume": num(r.volume),
        "lambda": num(r.lambda),
        "el_residual_sup": num(r.el_residual_sup),
        "el_residual_l2": num(r.el_residual_l2),
        "trace_residual_sup": num(r.trace_residual_sup),
        "trace_residual_l2": num(r.trace_residual_l2),
        "einstein_ratio": num(r.einstein_ratio),
        "einstein": r.einstein,
        "fd_error_estimate": opt(r.fd_error_estimate),
        "residual_unresolved": r.residual_unresolved,
    })
}

#[derive(Clone, Copy, Debug)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn new() -> Self {
        Self { lo: f64::INFINITY, hi: f64::NEG_INFINITY }
    }

    fn push(&mut self, x: f64) {
        self.lo = self.lo.min(x);
        self.hi = self.hi.max(x);
    }

    fn json(&self) -> Value {
        json!({"min": num(self.lo), "max": num(self.hi)})
    }
}

/// Curvature ranges over the quadrature nodes plus one functional report per `t`.
pub fn analyze(m: &Manifold, ts: &[f64]) -> Result<Value> {
    let (mut r, mut rc, mut w, mut w_sq) = (Range::new(), Range::new(), Range::new(), Range::new());
    let mut nodes = 0usize;
    m.for_each_node(Depth::Pointwise, |d| {
        let i = d.invariants;
        nodes += 1;
        r.push(i.scalar);
        rc.push(i.traceless_sq.sqrt());
        w.push(i.weyl_sq.sqrt());
        w_sq.push(i.weyl_sq);
        Ok(())
    })?;
    let reports = ts.iter().map(|&t| evaluate_functional(m, t)).collect::<Result<Vec<_>>>()?;
    let einstein = reports.first().map(|r| r.einstein);
    Ok(json!({
        "manifold": m.label(),
        "dim": m.dim(),
        "homogeneous": m.is_homogeneous(),
        "nodes": nodes,
        "volume": num(m.volume()?),
        "scalar": r.json(),
        "traceless_ricci_norm": rc.json(),
        "weyl_norm": w.json(),
        "weyl_norm_sq": w_sq.json(),
        "einstein": einstein,
        "euler_characteristic": m.euler_characteristic(),
        "functional": reports.iter().map(functional_json).collect::<Vec<_>>(),
    }))
}

pub fn verdict_json(v: &PinchingVerdict, inputs_digest: &str) -> Value {
    json!({
        "theorem": v.condition.id(),
        "t": num(v.t),
        "t_admissible": v.t_admissible,
        "status": v.status.as_str(),
        "lhs": num(v.lhs),
        "rhs": num(v.rhs),
        "margin": num(v.margin),
        "max_margin": opt(v.max_margin),
        "satisfied": v.hypothesis_satisfied,
        "conclusion": v.conclusion.as_str(),
        "inputs_digest": inputs_digest,
    })
}

pub fn yamabe_json(y: &YamabeEstimate) -> Value {
    json!({
        "upper": num(y.upper),
        "trial": nums(&y.trial),
        "lower_4d": opt(y.lower_4d),
        "lower_4d_clamped": y.lower_4d_clamped,
        "known_exact": opt(y.known_exact),
        "ordering_holds": y.ordering_holds(1e-9),
    })
}

pub fn gauss_bonnet_json(m: &Manifold, chi: i64, gb: &GaussBonnet, tol: f64, within: bool) -> Value {
    json!({
        "manifold": m.label(),
        "chi": chi,
        "lhs": num(gb.lhs),
        "rhs": num(gb.rhs),
        "error": num(gb.relative_error()),
        "error_kind": if gb.rhs == 0.0 { "absolute" } else { "relative" },
        "tolerance": num(tol),
        "within_tolerance": within,
    })
}

fn trace_row_json(r: &TraceRow) -> Value {
    json!({
        "iteration": r.iteration,
        "theta": nums(&r.theta),
        "value": num(r.value),
        "gradient_norm": num(r.gradient_norm),
        "step": num(r.step),
    })
}

pub fn search_json(s: &SearchResult) -> Value {
    json!({
        "family": s.family,
        "t": num(s.t),
        "theta": nums(&s.theta),
        "volume": num(s.volume),
        "status": s.status.as_str(),
        "iterations": s.iterations,
        "gradient_norm": num(s.gradient_norm),
        "report": functional_json(&s.report),
        "trace": s.trace.iter().map(trace_row_json).collect::<Vec<_>>(),
    })
}

/// Trace as CSV: `iteration,value,gradient_norm,step,theta_0,…`.
pub fn write_trace_csv<W: Write>(out: W, trace: &[TraceRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = trace.first().map(|r| r.theta.len()).unwrap_or(0);
    let mut header = vec!["iteration".to_string(), "value".into(), "gradient_norm".into(), "step".into()];
    header.extend((0..d).map(|i| format!("theta_{i}")));
    w.write_record(&header)?;
    for r in trace {
        let mut row = vec![r.iteration.to_string(), format!("{:.16e}", r.value), format!("{:.16e}", r.gradient_norm), format!("{:.16e}", r.step)];
        row.extend(r.theta.iter().map(|x| format!("{x:.16e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
