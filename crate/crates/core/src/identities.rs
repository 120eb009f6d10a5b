//! Pointwise curvature identities swept over the quadrature nodes.

use crate::error::Result;
use crate::manifold::{Depth, Manifold};
use crate::tensor::DenseTensor;

/// Sup-norm defects of pointwise identities over all nodes, in orthonormal frames.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentitySweep {
    pub nodes: usize,
    /// `sup |W|` (the Weyl tensor vanishes in dimension 3).
    pub weyl_sup: f64,
    /// `sup |g^{jl} W_{ijkl}|` over all traces.
    pub weyl_trace_sup: f64,
    /// `sup |tr R̊|`.
    pub traceless_trace_sup: f64,
    /// `sup` of the difference between the Ricci and traceless-Ricci forms of the Cotton tensor.
    pub cotton_forms_sup: f64,
    pub cotton_sup: f64,
    /// `sup |R̊_{ij,j} − ((n−2)/(2n)) R_{,i}|`.
    pub contracted_bianchi_sup: f64,
    pub scalar_grad_sup: f64,
    /// `sup |W_{ijkl,l} + ((n−3)/(n−2)) C_{ijk}|`.
    pub weyl_divergence_sup: f64,
    /// Largest relative violation of the curvature symmetries of `Rm`.
    pub riemann_symmetry_sup: f64,
}

fn max_abs(t: &DenseTensor) -> f64 {
    t.max_abs()
}

pub fn identity_sweep(m: &Manifold) -> Result<IdentitySweep> {
    let n = m.dim();
    let nf = n as f64;
    let mut out = IdentitySweep {
        nodes: 0,
        weyl_sup: 0.0,
        weyl_trace_sup: 0.0,
        traceless_trace_sup: 0.0,
        cotton_forms_sup: 0.0,
        cotton_sup: 0.0,
        contracted_bianchi_sup: 0.0,
        scalar_grad_sup: 0.0,
        weyl_divergence_sup: 0.0,
        riemann_symmetry_sup: 0.0,
    };
    m.for_each_node(Depth::FirstOrder, |d| {
        let b = d.bundle;
        out.nodes += 1;
        out.weyl_sup = out.weyl_sup.max(max_abs(&b.weyl));
        for i in 0..n {
            for k in 0..n {
                let tr: f64 = (0..n).map(|j| b.weyl.get(&[i, j, k, j])).sum();
                out.weyl_trace_sup = out.weyl_trace_sup.max(tr.abs());
            }
        }
        let tr: f64 = (0..n).map(|i| b.traceless_ricci.get(i, i)).sum();
        out.traceless_trace_sup = out.traceless_trace_sup.max(tr.abs());

        let alt = b.cotton_traceless_form();
        out.cotton_forms_sup = out.cotton_forms_sup.max(b.cotton.max_abs_diff(&alt)?);
        out.cotton_sup = out.cotton_sup.max(max_abs(&b.cotton));

        let div = b.traceless_divergence();
        for i in 0..n {
            let e = div[i] - (nf - 2.0) / (2.0 * nf) * b.scalar_grad[i];
            out.contracted_bianchi_sup = out.contracted_bianchi_sup.max(e.abs());
            out.scalar_grad_sup = out.scalar_grad_sup.max(b.scalar_grad[i].abs());
        }

        let wdiv = b.weyl_divergence();
        let expected = b.cotton.scaled(-(nf - 3.0) / (nf - 2.0));
        out.weyl_divergence_sup = out.weyl_divergence_sup.max(wdiv.max_abs_diff(&expected)?);

        out.riemann_symmetry_sup = out.riemann_symmetry_sup.max(crate::tensor::curvature_symmetry_defect(&b.riemann).max());
        Ok(())
    })?;
    Ok(out)
}
