//! Pointwise curvature assembly.
//!
//! Everything here is algebra on tensors at a single point: from a metric
//! 2-jet to Christoffel symbols and the Riemann tensor, from partial
//! derivatives of curvature fields to covariant derivatives, and from a
//! [`CurvatureBundle`] to the scalar invariants the functionals integrate.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{kn_raw, ricci_contraction, DenseTensor, SymmetricBilinear};

/// Metric components and their first and second coordinate partials at a point.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub dim: usize,
    /// `g[i*n + j]`
    pub g: Vec<f64>,
    /// `dg[(a*n + i)*n + j] = ∂_a g_ij`
    pub dg: Vec<f64>,
    /// `ddg[((a*n + b)*n + i)*n + j] = ∂_a ∂_b g_ij`
    pub ddg: Vec<f64>,
}

impl MetricJet {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, g: vec![0.0; dim * dim], dg: vec![0.0; dim.pow(3)], ddg: vec![0.0; dim.pow(4)] }
    }
}

/// Curvature at a point that only needs the metric 2-jet.
#[derive(Clone, Debug)]
pub struct PointCurvature {
    pub g: SymmetricBilinear,
    pub g_inv: DMatrix<f64>,
    /// `Γ^k_{ij}` stored at `[k, i, j]`.
    pub christoffel: DenseTensor,
    /// `∂_a Γ^k_{ij}` stored at `[a, k, i, j]`.
    pub christoffel_partials: DenseTensor,
    pub riemann: DenseTensor,
    pub ricci: DenseTensor,
    pub scalar: f64,
    pub traceless_ricci: DenseTensor,
    pub volume_density: f64,
}

impl PointCurvature {
    pub fn from_jet(jet: &MetricJet, point: &[f64]) -> Result<Self> {
        let n = jet.dim;
        let gm = DMatrix::from_fn(n, n, |i, j| 0.5 * (jet.g[i * n + j] + jet.g[j * n + i]));
        let chol = nalgebra::linalg::Cholesky::new(gm.clone()).ok_or(Error::DegenerateMetric { point: point.to_vec() })?;
        let volume_density = chol.l().diagonal().iter().product::<f64>();
        let g_inv = chol.inverse();
        let g = SymmetricBilinear::from_matrix(&gm)?;

        let dg = |a: usize, i: usize, j: usize| jet.dg[(a * n + i) * n + j];
        let ddg = |a: usize, b: usize, i: usize, j: usize| jet.ddg[((a * n + b) * n + i) * n + j];

        // first-kind symbols Γ_{l,ij} and their partials
        let mut first = vec![0.0; n * n * n];
        let mut dfirst = vec![0.0; n * n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    first[(l * n + i) * n + j] = 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
                    for a in 0..n {
                        dfirst[((a * n + l) * n + i) * n + j] =
                            0.5 * (ddg(a, i, j, l) + ddg(a, j, i, l) - ddg(a, l, i, j));
                    }
                }
            }
        }

        let mut christoffel = DenseTensor::zeros(3, n);
        let mut dchris = DenseTensor::zeros(4, n);
        // ∂_a g^{kl} = −g^{kp} ∂_a g_pq g^{ql}
        let mut dginv = vec![0.0; n * n * n];
        for a in 0..n {
            let dga = DMatrix::from_fn(n, n, |p, q| dg(a, p, q));
            let m = -(&g_inv * dga * &g_inv);
            for k in 0..n {
                for l in 0..n {
                    dginv[(a * n + k) * n + l] = m[(k, l)];
                }
            }
        }
        {
            let c = christoffel.data_mut();
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        c[(k * n + i) * n + j] = (0..n).map(|l| g_inv[(k, l)] * first[(l * n + i) * n + j]).sum();
                    }
                }
            }
        }
        {
            let d = dchris.data_mut();
            for a in 0..n {
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let mut s = 0.0;
                            for l in 0..n {
                                s += dginv[(a * n + k) * n + l] * first[(l * n + i) * n + j]
                                    + g_inv[(k, l)] * dfirst[((a * n + l) * n + i) * n + j];
                            }
                            d[((a * n + k) * n + i) * n + j] = s;
                        }
                    }
                }
            }
        }

        let riemann = riemann_from_connection(&g, &christoffel, &dchris);
        Self::finish(g, g_inv, christoffel, dchris, riemann, volume_density)
    }

    pub(crate) fn finish(
        g: SymmetricBilinear,
        g_inv: DMatrix<f64>,
        christoffel: DenseTensor,
        christoffel_partials: DenseTensor,
        riemann: DenseTensor,
        volume_density: f64,
    ) -> Result<Self> {
        let n = g.dim();
        let ricci = symmetrize2(&ricci_contraction(&riemann, &g_inv));
        let scalar = trace(&ricci, &g_inv);
        let traceless_ricci = ricci.axpy(-scalar / n as f64, g.tensor())?;
        Ok(Self { g, g_inv, christoffel, christoffel_partials, riemann, ricci, scalar, traceless_ricci, volume_density })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Values differenced by the finite-difference pipeline, flattened:
    /// Riemann, Ricci, `|R̊|²`.
    pub(crate) fn field_values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.riemann.data().len() + self.ricci.data().len() + 1);
        v.extend_from_slice(self.riemann.data());
        v.extend_from_slice(self.ricci.data());
        v.push(norm_sq(&self.traceless_ricci, &self.g_inv));
        v
    }
}

/// `R_{ijkl} = g_{km} (∂_i Γ^m_{jl} − ∂_j Γ^m_{il} + Γ^m_{ip} Γ^p_{jl} − Γ^m_{jp} Γ^p_{il})`.
pub(crate) fn riemann_from_connection(g: &SymmetricBilinear, chris: &DenseTensor, dchris: &DenseTensor) -> DenseTensor {
    let n = g.dim();
    let c = chris.data();
    let dc = dchris.data();
    let gamma = |k: usize, i: usize, j: usize| c[(k * n + i) * n + j];
    let dgamma = |a: usize, k: usize, i: usize, j: usize| dc[((a * n + k) * n + i) * n + j];
    // R_{ij l}^m
    let mut up = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let mut s = dgamma(i, m, j, l) - dgamma(j, m, i, l);
                    for p in 0..n {
                        s += gamma(m, i, p) * gamma(p, j, l) - gamma(m, j, p) * gamma(p, i, l);
                    }
                    up[((i * n + j) * n + l) * n + m] = s;
                }
            }
        }
    }
    DenseTensor::from_fn(4, n, |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        (0..n).map(|m| g.get(k, m) * up[((i * n + j) * n + l) * n + m]).sum()
    })
}

pub(crate) fn symmetrize2(t: &DenseTensor) -> DenseTensor {
    DenseTensor::from_fn(2, t.dim(), |x| 0.5 * (t.get(&[x[0], x[1]]) + t.get(&[x[1], x[0]])))
}

pub(crate) fn trace(t: &DenseTensor, g_inv: &DMatrix<f64>) -> f64 {
    let n = t.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g_inv[(i, j)] * t.get(&[i, j]);
        }
    }
    s
}

pub(crate) fn norm_sq(t: &DenseTensor, g_inv: &DMatrix<f64>) -> f64 {
    t.raise_all(g_inv).and_then(|r| r.dot(t)).unwrap_or(f64::NAN)
}

/// `∇_a T_{i…}` from the coordinate partials `∂_a T_{i…}` (one tensor per axis).
/// The derivative index is appended last.
pub fn covariant_from_partials(t: &DenseTensor, partials: &[DenseTensor], christoffel: &DenseTensor) -> DenseTensor {
    let n = t.dim();
    let r = t.rank();
    let c = christoffel.data();
    let mut out = DenseTensor::zeros(r + 1, n);
    let mut idx = vec![0usize; r];
    let mut shifted = vec![0usize; r];
    let len = t.data().len();
    for o in 0..len {
        for a in 0..n {
            let mut v = partials[a].data()[o];
            for s in 0..r {
                shifted.copy_from_slice(&idx);
                for m in 0..n {
                    let gam = c[(m * n + a) * n + idx[s]];
                    if gam != 0.0 {
                        shifted[s] = m;
                        v -= gam * t.get(&shifted);
                    }
                }
            }
            out.data_mut()[o * n + a] = v;
        }
        crate::tensor::increment(&mut idx, n);
    }
    out
}

/// `∇_b ∇_a R_{ij}` stored at `[i, j, a, b]`, from Ricci, its first and second
/// coordinate partials and the connection with its partials.
pub fn ricci_hessian(
    ricci: &DenseTensor,
    d_ricci: &[DenseTensor],
    dd_ricci: &[Vec<DenseTensor>],
    christoffel: &DenseTensor,
    christoffel_partials: &DenseTensor,
) -> DenseTensor {
    let n = ricci.dim();
    let gamma = |k: usize, i: usize, j: usize| christoffel.data()[(k * n + i) * n + j];
    let dgamma = |a: usize, k: usize, i: usize, j: usize| christoffel_partials.data()[((a * n + k) * n + i) * n + j];
    let ric = |i: usize, j: usize| ricci.data()[i * n + j];
    let dric = |b: usize, i: usize, j: usize| d_ricci[b].data()[i * n + j];

    // T_{ija} = ∇_a R_ij
    let first = covariant_from_partials(ricci, d_ricci, christoffel);
    let t = |i: usize, j: usize, a: usize| first.data()[(i * n + j) * n + a];

    DenseTensor::from_fn(4, n, |x| {
        let (i, j, a, b) = (x[0], x[1], x[2], x[3]);
        let mut dbt = dd_ricci[a][b].data()[i * n + j];
        for m in 0..n {
            dbt -= dgamma(b, m, a, i) * ric(m, j) + gamma(m, a, i) * dric(b, m, j);
            dbt -= dgamma(b, m, a, j) * ric(i, m) + gamma(m, a, j) * dric(b, i, m);
        }
        let mut v = dbt;
        for m in 0..n {
            v -= gamma(m, b, i) * t(m, j, a) + gamma(m, b, j) * t(i, m, a) + gamma(m, b, a) * t(i, j, m);
        }
        v
    })
}

/// All pointwise curvature quantities at a sample point.
///
/// In a coordinate chart the tensors carry coordinate components and
/// `christoffel` holds `Γ^k_{ij}`; after [`CurvatureBundle::to_orthonormal`]
/// the metric is the identity and `christoffel` holds the connection
/// coefficients of the orthonormal frame.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    pub point: Vec<f64>,
    pub g: SymmetricBilinear,
    pub g_inv: DMatrix<f64>,
    pub christoffel: DenseTensor,
    pub riemann: DenseTensor,
    pub ricci: SymmetricBilinear,
    pub scalar: f64,
    /// `R_{ij,k}` at `[i, j, k]`.
    pub ricci_grad: DenseTensor,
    /// `R_{,i}`.
    pub scalar_grad: Vec<f64>,
    pub traceless_ricci: SymmetricBilinear,
    /// `R̊_{ij,k}`, differenced from the traceless field itself.
    pub traceless_ricci_grad: DenseTensor,
    /// `R_{ijkl,m}` at `[i, j, k, l, m]`.
    pub riemann_grad: DenseTensor,
    pub weyl: DenseTensor,
    pub cotton: DenseTensor,
    pub volume_density: f64,
}

/// Coordinate partials of the curvature fields at the bundle's point.
pub(crate) struct FieldPartials {
    pub riemann: Vec<DenseTensor>,
    pub ricci: Vec<DenseTensor>,
}

impl FieldPartials {
    pub fn from_flat(n: usize, partials: &[Vec<f64>]) -> Result<Self> {
        let n4 = n.pow(4);
        let n2 = n * n;
        let mut out = Self { riemann: Vec::new(), ricci: Vec::new() };
        for p in partials {
            out.riemann.push(DenseTensor::from_vec(4, n, p[..n4].to_vec())?);
            out.ricci.push(DenseTensor::from_vec(2, n, p[n4..n4 + n2].to_vec())?);
        }
        Ok(out)
    }

    pub fn zeros(n: usize) -> Self {
        Self { riemann: vec![DenseTensor::zeros(4, n); n], ricci: vec![DenseTensor::zeros(2, n); n] }
    }
}

impl CurvatureBundle {
    pub(crate) fn assemble(point: &[f64], pc: &PointCurvature, partials: &FieldPartials) -> Result<Self> {
        let chris = &pc.christoffel;
        let riemann_grad = covariant_from_partials(&pc.riemann, &partials.riemann, chris);
        let ricci_grad = covariant_from_partials(&pc.ricci, &partials.ricci, chris);
        Self::from_parts(
            point.to_vec(),
            pc.g.clone(),
            pc.g_inv.clone(),
            chris.clone(),
            pc.riemann.clone(),
            ricci_grad,
            riemann_grad,
            pc.volume_density,
        )
    }

    /// Completes a bundle from the Riemann tensor and the covariant
    /// derivatives of Riemann and Ricci. `∇R` and `∇R̊` follow from `∇Ric`
    /// by `∇g = 0`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        point: Vec<f64>,
        g: SymmetricBilinear,
        g_inv: DMatrix<f64>,
        christoffel: DenseTensor,
        riemann: DenseTensor,
        ricci_grad: DenseTensor,
        riemann_grad: DenseTensor,
        volume_density: f64,
    ) -> Result<Self> {
        let n = g.dim();
        let nf = n as f64;
        let scalar_grad: Vec<f64> = (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += g_inv[(i, j)] * ricci_grad.get(&[i, j, k]);
                    }
                }
                s
            })
            .collect();
        let traceless_ricci_grad =
            DenseTensor::from_fn(3, n, |x| ricci_grad.get(x) - scalar_grad[x[2]] * g.get(x[0], x[1]) / nf);
        let ricci_t = symmetrize2(&ricci_contraction(&riemann, &g_inv));
        let scalar = trace(&ricci_t, &g_inv);
        let traceless_t = ricci_t.axpy(-scalar / nf, g.tensor())?;
        let ric_g = kn_raw(&ricci_t, g.tensor());
        let g_g = kn_raw(g.tensor(), g.tensor());
        let weyl = riemann.axpy(-1.0 / (nf - 2.0), &ric_g)?.axpy(scalar / (2.0 * (nf - 1.0) * (nf - 2.0)), &g_g)?;
        let cotton = DenseTensor::from_fn(3, n, |x| {
            let (i, j, k) = (x[0], x[1], x[2]);
            ricci_grad.get(&[k, j, i]) - ricci_grad.get(&[k, i, j])
                - (scalar_grad[i] * g.get(j, k) - scalar_grad[j] * g.get(i, k)) / (2.0 * (nf - 1.0))
        });
        Ok(Self {
            point,
            ricci: SymmetricBilinear::new(ricci_t)?,
            traceless_ricci: SymmetricBilinear::new(traceless_t)?,
            g,
            g_inv,
            christoffel,
            riemann,
            scalar,
            ricci_grad,
            scalar_grad,
            traceless_ricci_grad,
            riemann_grad,
            weyl,
            cotton,
            volume_density,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Cotton tensor from the traceless-Ricci form
    /// `R̊_{kj,i} − R̊_{ki,j} + (n−2)/(2n(n−1)) (R_{,i} g_jk − R_{,j} g_ik)`.
    pub fn cotton_traceless_form(&self) -> DenseTensor {
        let n = self.dim();
        let nf = n as f64;
        let c = (nf - 2.0) / (2.0 * nf * (nf - 1.0));
        let t = &self.traceless_ricci_grad;
        let dr = &self.scalar_grad;
        DenseTensor::from_fn(3, n, |x| {
            let (i, j, k) = (x[0], x[1], x[2]);
            t.get(&[k, j, i]) - t.get(&[k, i, j]) + c * (dr[i] * self.g.get(j, k) - dr[j] * self.g.get(i, k))
        })
    }

    /// `W_{ijkl,l} = g^{lm} ∇_m W_{ijkl}` with `∇W` built from `∇Rm`, `∇Ric`, `∇R`.
    pub fn weyl_divergence(&self) -> DenseTensor {
        let n = self.dim();
        let nf = n as f64;
        let g = self.g.tensor();
        let gi = &self.g_inv;
        let a = 1.0 / (nf - 2.0);
        let b = 1.0 / (2.0 * (nf - 1.0) * (nf - 2.0));
        let g_g = kn_raw(g, g);
        DenseTensor::from_fn(3, n, |x| {
            let (i, j, k) = (x[0], x[1], x[2]);
            let mut s = 0.0;
            for l in 0..n {
                for m in 0..n {
                    let w = gi[(l, m)];
                    if w == 0.0 {
                        continue;
                    }
                    let drm = self.riemann_grad.get(&[i, j, k, l, m]);
                    let dric = |p: usize, q: usize| self.ricci_grad.get(&[p, q, m]);
                    let kn = dric(i, k) * g.get(&[j, l]) - dric(i, l) * g.get(&[j, k]) + dric(j, l) * g.get(&[i, k])
                        - dric(j, k) * g.get(&[i, l]);
                    let dw = drm - a * kn + b * self.scalar_grad[m] * g_g.get(&[i, j, k, l]);
                    s += w * dw;
                }
            }
            s
        })
    }

    /// `R̊_{ij,j}` (divergence of the traceless Ricci tensor).
    pub fn traceless_divergence(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        s += self.g_inv[(j, k)] * self.traceless_ricci_grad.get(&[i, j, k]);
                    }
                }
                s
            })
            .collect()
    }

    /// The same bundle expressed in the frame `e_a = Σ_i E_{ia} ∂_i`, with `E`
    /// from [`crate::tensor::orthonormal_frame`].
    pub fn to_orthonormal(&self) -> Result<Self> {
        let e = crate::tensor::orthonormal_frame(&self.g).map_err(|_| Error::DegenerateMetric { point: self.point.clone() })?;
        self.in_frame(&e)
    }

    /// Re-expresses every tensor in the frame with columns `frame`; the frame
    /// must be orthonormal for the result's metric to be the identity.
    pub fn in_frame(&self, frame: &DMatrix<f64>) -> Result<Self> {
        let n = self.dim();
        let e_inv = frame.clone().try_inverse().ok_or(Error::DegenerateMetric { point: self.point.clone() })?;
        let g = SymmetricBilinear::new(self.g.tensor().in_frame(frame)?)?;
        let g_inv = e_inv.clone() * &self.g_inv * e_inv.transpose();
        // Γ'^a_{bc} = (E⁻¹)_{ak} Γ^k_{ij} E_{ib} E_{jc}
        let chris = self.christoffel.apply_to_slot(0, &e_inv.transpose())?.apply_to_slot(1, frame)?.apply_to_slot(2, frame)?;
        let scalar_grad: Vec<f64> = (0..n).map(|a| (0..n).map(|i| frame[(i, a)] * self.scalar_grad[i]).sum()).collect();
        let point = self.point.clone();
        Ok(Self {
            point,
            g,
            g_inv,
            christoffel: chris,
            riemann: self.riemann.in_frame(frame)?,
            ricci: SymmetricBilinear::new(self.ricci.tensor().in_frame(frame)?)?,
            scalar: self.scalar,
            ricci_grad: self.ricci_grad.in_frame(frame)?,
            scalar_grad,
            traceless_ricci: SymmetricBilinear::new(self.traceless_ricci.tensor().in_frame(frame)?)?,
            traceless_ricci_grad: self.traceless_ricci_grad.in_frame(frame)?,
            riemann_grad: self.riemann_grad.in_frame(frame)?,
            weyl: self.weyl.in_frame(frame)?,
            cotton: self.cotton.in_frame(frame)?,
            volume_density: self.volume_density,
        })
    }

    /// Scalar invariants; computed in an orthonormal frame.
    pub fn invariants(&self) -> Result<Invariants> {
        let ortho = self.to_orthonormal()?;
        Ok(Invariants::from_orthonormal(&ortho))
    }
}

/// Second covariant derivatives of Ricci at a point, plus the Laplacian of `|R̊|²`.
#[derive(Clone, Debug)]
pub struct SecondOrder {
    /// `∇_b ∇_a R_ij` at `[i, j, a, b]`.
    pub ricci_hessian: DenseTensor,
    /// `Δ|R̊|²` (Laplace–Beltrami of the scalar field).
    pub laplacian_traceless_sq: f64,
}

impl SecondOrder {
    /// `R_{,ij}`.
    pub fn scalar_hessian(&self, g_inv: &DMatrix<f64>) -> DenseTensor {
        let n = self.ricci_hessian.dim();
        DenseTensor::from_fn(2, n, |x| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += g_inv[(i, j)] * self.ricci_hessian.get(&[i, j, x[0], x[1]]);
                }
            }
            s
        })
    }

    /// Rough Laplacian `ΔR_ij = g^{ab} ∇_b ∇_a R_ij`.
    pub fn ricci_laplacian(&self, g_inv: &DMatrix<f64>) -> DenseTensor {
        let n = self.ricci_hessian.dim();
        DenseTensor::from_fn(2, n, |x| {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += g_inv[(a, b)] * self.ricci_hessian.get(&[x[0], x[1], a, b]);
                }
            }
            s
        })
    }

    pub fn in_frame(&self, frame: &DMatrix<f64>) -> Result<Self> {
        Ok(Self { ricci_hessian: self.ricci_hessian.in_frame(frame)?, laplacian_traceless_sq: self.laplacian_traceless_sq })
    }
}

/// Scalar curvature invariants at a point (orthonormal-frame contractions).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Invariants {
    pub dim: usize,
    pub scalar: f64,
    pub ricci_sq: f64,
    pub traceless_sq: f64,
    pub riemann_sq: f64,
    pub weyl_sq: f64,
    /// `W_{ijkl} R̊_{jl} R̊_{ik}`
    pub weyl_rr: f64,
    /// `R̊_{ij} R̊_{jk} R̊_{ki}`
    pub traceless_cubed: f64,
    /// `|∇R̊|²`
    pub grad_traceless_sq: f64,
    /// `|∇|R̊||²`
    pub grad_abs_traceless_sq: f64,
    /// `|∇R|²`
    pub grad_scalar_sq: f64,
    pub cotton_sq: f64,
    /// `|W − ((n−4)/(√(2n)(n−2))) R̊∘∧g|`
    pub kn_minus: f64,
    /// `|W + (√2/(√n(n−2))) R̊∘∧g|`
    pub kn_plus: f64,
}

impl Invariants {
    pub fn from_orthonormal(b: &CurvatureBundle) -> Self {
        let n = b.dim();
        let nf = n as f64;
        let sq = |t: &DenseTensor| t.data().iter().map(|v| v * v).sum::<f64>();
        let rc = b.traceless_ricci.tensor();
        let rcd = rc.data();
        let at = |i: usize, j: usize| rcd[i * n + j];
        let mut weyl_rr = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        weyl_rr += b.weyl.get(&[i, j, k, l]) * at(j, l) * at(i, k);
                    }
                }
            }
        }
        let mut cubed = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    cubed += at(i, j) * at(j, k) * at(k, i);
                }
            }
        }
        let traceless_sq = sq(rc);
        let abs = libm::sqrt(traceless_sq);
        let grad_abs_traceless_sq = if abs > 0.0 {
            (0..n)
                .map(|k| {
                    let mut s = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            s += at(i, j) * b.traceless_ricci_grad.get(&[i, j, k]);
                        }
                    }
                    {
                    let q = s / abs;
                    q * q
                }
                })
                .sum()
        } else {
            0.0
        };
        let kn = kn_raw(rc, b.g.tensor());
        let c_minus = -(nf - 4.0) / (libm::sqrt(2.0 * nf) * (nf - 2.0));
        let c_plus = libm::sqrt(2.0) / (libm::sqrt(nf) * (nf - 2.0));
        let combo = |c: f64| libm::sqrt(b.weyl.data().iter().zip(kn.data()).map(|(w, k)| (w + c * k) * (w + c * k)).sum::<f64>());
        Self {
            dim: n,
            scalar: b.scalar,
            ricci_sq: sq(b.ricci.tensor()),
            traceless_sq,
            riemann_sq: sq(&b.riemann),
            weyl_sq: sq(&b.weyl),
            weyl_rr,
            traceless_cubed: cubed,
            grad_traceless_sq: sq(&b.traceless_ricci_grad),
            grad_abs_traceless_sq,
            grad_scalar_sq: b.scalar_grad.iter().map(|v| v * v).sum(),
            cotton_sq: sq(&b.cotton),
            kn_minus: combo(c_minus),
            kn_plus: combo(c_plus),
        }
    }

    /// `|W + c·R̊∘∧g|` evaluated through the orthogonal splitting
    /// `|W|² + 4(n−2)c²|R̊|²` (exact when `W` is trace-free).
    pub fn kn_norm_split(&self, c: f64) -> f64 {
        let n = self.dim as f64;
        libm::sqrt(self.weyl_sq + 4.0 * (n - 2.0) * c * c * self.traceless_sq)
    }
}
