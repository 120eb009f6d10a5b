//! Closed-form curvature of homogeneous model spaces.
//!
//! Each space is described in a global orthonormal frame `e_1, …, e_n` with
//! constant curvature components and constant connection coefficients
//! `Γ^k_{ij} = ⟨∇_{e_i} e_j, e_k⟩`. Covariant derivatives of any tensor with
//! constant frame components then reduce to `−Σ Γ·T` terms. Symmetric spaces
//! (round spheres, products of spheres, flat tori) have parallel curvature
//! and are represented with `Γ = 0`; left-invariant metrics on `SU(2)` use
//! the Koszul formula on their structure constants.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::curvature::{covariant_from_partials, ricci_hessian, CurvatureBundle, FieldPartials, SecondOrder};
use crate::error::{invalid, Result};
use crate::tensor::{DenseTensor, SymmetricBilinear};

#[derive(Clone, Debug, PartialEq)]
pub enum HomogeneousKind {
    RoundSphere { n: usize, radius: f64 },
    ProductSpheres { p: usize, r1: f64, q: usize, r2: f64 },
    FlatTorus { periods: Vec<f64> },
    /// Left-invariant metric `λ₁σ₁² + λ₂σ₂² + λ₃σ₃²` on `SU(2) = S³`, with
    /// `σ_i` dual to the left-invariant fields `X_i(y) = y·e_i` (quaternions),
    /// `[X₁, X₂] = 2X₃` cyclically. `(1, 1, 1)` is the unit round sphere.
    Berger { lambda: [f64; 3] },
}

#[derive(Clone, Debug)]
pub struct HomogeneousSpace {
    kind: HomogeneousKind,
    dim: usize,
    volume: f64,
    riemann: DenseTensor,
    connection: DenseTensor,
}

/// Volume of the round sphere `S^n(r)`.
pub fn sphere_volume(n: usize, r: f64) -> f64 {
    let np1 = n as f64 + 1.0;
    2.0 * libm::pow(PI, np1 / 2.0) / libm::tgamma(np1 / 2.0) * libm::pow(r, n as f64)
}

fn constant_curvature_block(rm: &mut DenseTensor, range: core::ops::Range<usize>, k: f64) {
    for i in range.clone() {
        for j in range.clone() {
            if i == j {
                continue;
            }
            rm.set(&[i, j, i, j], k);
            rm.set(&[i, j, j, i], -k);
        }
    }
}

/// Connection coefficients `Γ^k_{ij} = ½(c_ij^k − c_jk^i + c_ki^j)` of a
/// left-invariant orthonormal frame with `[e_i, e_j] = c_ij^k e_k`.
pub fn lie_connection(c: &DenseTensor) -> DenseTensor {
    let n = c.dim();
    let mut gamma = DenseTensor::zeros(3, n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let v = 0.5 * (c.get(&[i, j, k]) - c.get(&[j, k, i]) + c.get(&[k, i, j]));
                gamma.set(&[k, i, j], v);
            }
        }
    }
    gamma
}

/// `R_{ijkl} = ⟨R(e_i, e_j) e_l, e_k⟩` for a left-invariant frame.
pub fn lie_riemann(c: &DenseTensor, gamma: &DenseTensor) -> DenseTensor {
    let n = c.dim();
    DenseTensor::from_fn(4, n, |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        let mut s = 0.0;
        for m in 0..n {
            s += gamma.get(&[m, j, l]) * gamma.get(&[k, i, m]) - gamma.get(&[m, i, l]) * gamma.get(&[k, j, m])
                - c.get(&[i, j, m]) * gamma.get(&[k, m, l]);
        }
        s
    })
}

/// Structure constants of the Berger frame `e_i = X_i/√λ_i`.
pub fn berger_structure(lambda: [f64; 3]) -> DenseTensor {
    let mut c = DenseTensor::zeros(3, 3);
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let v = 2.0 * libm::sqrt(lambda[k] / (lambda[i] * lambda[j]));
        c.set(&[i, j, k], v);
        c.set(&[j, i, k], -v);
    }
    c
}

impl HomogeneousSpace {
    pub fn round_sphere(n: usize, radius: f64) -> Result<Self> {
        if n < 2 || !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid("round_sphere needs n ≥ 2 and radius > 0"));
        }
        let mut rm = DenseTensor::zeros(4, n);
        constant_curvature_block(&mut rm, 0..n, 1.0 / (radius * radius));
        Ok(Self::parallel(HomogeneousKind::RoundSphere { n, radius }, n, sphere_volume(n, radius), rm))
    }

    pub fn product_spheres(p: usize, r1: f64, q: usize, r2: f64) -> Result<Self> {
        if p < 2 || q < 2 || !(r1 > 0.0) || !(r2 > 0.0) || !r1.is_finite() || !r2.is_finite() {
            return Err(invalid("product_spheres needs p, q ≥ 2 and radii > 0"));
        }
        let n = p + q;
        let mut rm = DenseTensor::zeros(4, n);
        constant_curvature_block(&mut rm, 0..p, 1.0 / (r1 * r1));
        constant_curvature_block(&mut rm, p..n, 1.0 / (r2 * r2));
        let vol = sphere_volume(p, r1) * sphere_volume(q, r2);
        Ok(Self::parallel(HomogeneousKind::ProductSpheres { p, r1, q, r2 }, n, vol, rm))
    }

    pub fn flat_torus(periods: &[f64]) -> Result<Self> {
        if periods.len() < 2 || periods.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(invalid("flat_torus needs at least two positive periods"));
        }
        let n = periods.len();
        let vol = periods.iter().product();
        Ok(Self::parallel(HomogeneousKind::FlatTorus { periods: periods.to_vec() }, n, vol, DenseTensor::zeros(4, n)))
    }

    pub fn berger_sphere(lambda: [f64; 3]) -> Result<Self> {
        if lambda.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(invalid("berger_sphere needs positive eigenvalues"));
        }
        let c = berger_structure(lambda);
        let gamma = lie_connection(&c);
        let riemann = lie_riemann(&c, &gamma);
        // σ-volume of SU(2) with the unit round metric is 2π²
        let volume = 2.0 * PI * PI * libm::sqrt(lambda[0] * lambda[1] * lambda[2]);
        Ok(Self { kind: HomogeneousKind::Berger { lambda }, dim: 3, volume, riemann, connection: gamma })
    }

    fn parallel(kind: HomogeneousKind, dim: usize, volume: f64, riemann: DenseTensor) -> Self {
        Self { kind, dim, volume, riemann, connection: DenseTensor::zeros(3, dim) }
    }

    pub fn kind(&self) -> &HomogeneousKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Orthonormal-frame Riemann tensor.
    pub fn riemann(&self) -> &DenseTensor {
        &self.riemann
    }

    /// Frame connection coefficients `Γ^k_{ij}` at `[k, i, j]`.
    pub fn connection(&self) -> &DenseTensor {
        &self.connection
    }

    pub fn euler_characteristic(&self) -> i64 {
        let sphere = |n: usize| if n % 2 == 0 { 2 } else { 0 };
        match &self.kind {
            HomogeneousKind::RoundSphere { n, .. } => sphere(*n),
            HomogeneousKind::ProductSpheres { p, q, .. } => sphere(*p) * sphere(*q),
            HomogeneousKind::FlatTorus { .. } | HomogeneousKind::Berger { .. } => 0,
        }
    }

    /// The same space with metric `c·g`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid("metric scale must be positive"));
        }
        let s = libm::sqrt(c);
        match &self.kind {
            HomogeneousKind::RoundSphere { n, radius } => Self::round_sphere(*n, radius * s),
            HomogeneousKind::ProductSpheres { p, r1, q, r2 } => Self::product_spheres(*p, r1 * s, *q, r2 * s),
            HomogeneousKind::FlatTorus { periods } => {
                Self::flat_torus(&periods.iter().map(|p| p * s).collect::<Vec<_>>())
            }
            HomogeneousKind::Berger { lambda } => Self::berger_sphere([lambda[0] * c, lambda[1] * c, lambda[2] * c]),
        }
    }

    /// Curvature bundle in the orthonormal frame; coordinate partials of all
    /// frame components vanish.
    pub fn bundle(&self) -> Result<CurvatureBundle> {
        let n = self.dim;
        let g = SymmetricBilinear::identity(n);
        let g_inv = nalgebra::DMatrix::identity(n, n);
        let gamma = &self.connection;
        let zeros = FieldPartials::zeros(n);
        let ricci = crate::curvature::symmetrize2(&crate::tensor::ricci_contraction(&self.riemann, &g_inv));
        CurvatureBundle::from_parts(
            Vec::new(),
            g,
            g_inv,
            gamma.clone(),
            self.riemann.clone(),
            covariant_from_partials(&ricci, &zeros.ricci, gamma),
            covariant_from_partials(&self.riemann, &zeros.riemann, gamma),
            1.0,
        )
    }

    pub fn second_order(&self, bundle: &CurvatureBundle) -> SecondOrder {
        let n = self.dim;
        let zeros2 = vec![DenseTensor::zeros(2, n); n];
        let zeros22 = vec![zeros2.clone(); n];
        let hess = ricci_hessian(
            bundle.ricci.tensor(),
            &zeros2,
            &zeros22,
            &self.connection,
            &DenseTensor::zeros(4, n),
        );
        SecondOrder { ricci_hessian: hess, laplacian_traceless_sq: 0.0 }
    }
}
