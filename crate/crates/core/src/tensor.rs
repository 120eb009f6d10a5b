//! Dense real tensors over an `n`-dimensional tangent space.
//!
//! Components are stored row-major with every index lowered. Contractions raise
//! indices with the inverse of a supplied metric. Curvature tensors follow the
//! convention `R_{ijkl} = <R(e_i, e_j) e_l, e_k>`, so the unit round sphere has
//! `R_{ijij} = +1` in an orthonormal frame and `Ric_{ik} = g^{jl} R_{ijkl}`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    rank: usize,
    dim: usize,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(rank: usize, dim: usize) -> Self {
        Self { rank, dim, data: vec![0.0; dim.pow(rank as u32)] }
    }

    pub fn from_vec(rank: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        let expected = dim.pow(rank as u32);
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: data.len() });
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(alloc::format!("tensor component {bad}")));
        }
        Ok(Self { rank, dim, data })
    }

    /// Builds a tensor from a function of the multi-index.
    pub fn from_fn(rank: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(rank, dim);
        let mut idx = vec![0usize; rank];
        for slot in t.data.iter_mut() {
            *slot = f(&idx);
            increment(&mut idx, dim);
        }
        t
    }

    pub fn scalar(v: f64) -> Self {
        Self { rank: 0, dim: 1, data: vec![v] }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { rank: self.rank, dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect();
        Ok(Self { rank: self.rank, dim: self.dim, data })
    }

    /// Plain component inner product (orthonormal-frame contraction).
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.data.iter().zip(&other.data).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: other.rank });
        }
        Ok(())
    }

    /// Applies `m` to one slot: `out[.., a, ..] = Σ_i m[i][a] · self[.., i, ..]`.
    pub fn apply_to_slot(&self, slot: usize, m: &DMatrix<f64>) -> Result<Self> {
        if slot >= self.rank {
            return Err(Error::InvalidSlot { slot, rank: self.rank });
        }
        let n = self.dim;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
        let inner = n.pow((self.rank - 1 - slot) as u32);
        let outer = n.pow(slot as u32);
        let mut out = vec![0.0; self.data.len()];
        for o in 0..outer {
            let base = o * n * inner;
            for a in 0..n {
                for i in 0..n {
                    let c = m[(i, a)];
                    if c == 0.0 {
                        continue;
                    }
                    let src = base + i * inner;
                    let dst = base + a * inner;
                    for k in 0..inner {
                        out[dst + k] += c * self.data[src + k];
                    }
                }
            }
        }
        Ok(Self { rank: self.rank, dim: n, data: out })
    }

    /// Re-expresses a covariant tensor in the frame `e_a = Σ_i E_{ia} ∂_i`.
    pub fn in_frame(&self, frame: &DMatrix<f64>) -> Result<Self> {
        let mut t = self.clone();
        for s in 0..self.rank {
            t = t.apply_to_slot(s, frame)?;
        }
        Ok(t)
    }

    /// Raises every index with `g_inv`.
    pub fn raise_all(&self, g_inv: &DMatrix<f64>) -> Result<Self> {
        self.in_frame(g_inv)
    }
}

pub(crate) fn increment(idx: &mut [usize], dim: usize) {
    for i in idx.iter_mut().rev() {
        *i += 1;
        if *i < dim {
            return;
        }
        *i = 0;
    }
}

/// Symmetric 2-tensor; metrics, Ricci and traceless Ricci tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricBilinear(DenseTensor);

impl SymmetricBilinear {
    pub fn new(t: DenseTensor) -> Result<Self> {
        if t.rank() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: t.rank() });
        }
        let n = t.dim();
        let scale = t.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (t.get(&[i, j]) - t.get(&[j, i])).abs() > 1e-12 * scale {
                    return Err(invalid("bilinear form is not symmetric"));
                }
            }
        }
        Ok(Self(t))
    }

    pub fn identity(n: usize) -> Self {
        Self(DenseTensor::from_fn(2, n, |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 }))
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
        }
        Self::new(DenseTensor::from_vec(2, n, (0..n * n).map(|k| m[(k / n, k % n)]).collect())?)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.0.get(&[i, j]))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.0
    }

    pub fn into_tensor(self) -> DenseTensor {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(&[i, j])
    }

    /// Inverse, failing on non-positive-definite input.
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let chol = nalgebra::linalg::Cholesky::new(self.to_matrix())
            .ok_or(Error::DegenerateMetric { point: Vec::new() })?;
        Ok(chol.inverse())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = nalgebra::linalg::SymmetricEigen::new(self.to_matrix());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }
}

/// Rank-4 tensor with the algebraic symmetries of a Riemann tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicCurvatureTensor(DenseTensor);

/// Largest violations of the curvature symmetries, relative to the tensor's size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryDefect {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub bianchi: f64,
}

impl SymmetryDefect {
    pub fn max(&self) -> f64 {
        self.antisymmetry.max(self.pair_symmetry).max(self.bianchi)
    }
}

pub fn curvature_symmetry_defect(t: &DenseTensor) -> SymmetryDefect {
    let n = t.dim();
    let scale = t.max_abs().max(f64::MIN_POSITIVE);
    let mut d = SymmetryDefect { antisymmetry: 0.0, pair_symmetry: 0.0, bianchi: 0.0 };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = t.get(&[i, j, k, l]);
                    let a = (r + t.get(&[j, i, k, l])).abs().max((r + t.get(&[i, j, l, k])).abs());
                    d.antisymmetry = d.antisymmetry.max(a);
                    d.pair_symmetry = d.pair_symmetry.max((r - t.get(&[k, l, i, j])).abs());
                    let b = r + t.get(&[i, k, l, j]) + t.get(&[i, l, j, k]);
                    d.bianchi = d.bianchi.max(b.abs());
                }
            }
        }
    }
    d.antisymmetry /= scale;
    d.pair_symmetry /= scale;
    d.bianchi /= scale;
    d
}

impl AlgebraicCurvatureTensor {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(t: DenseTensor) -> Result<Self> {
        if t.rank() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: t.rank() });
        }
        if t.dim() < 3 {
            return Err(invalid("algebraic curvature tensors need n >= 3"));
        }
        if t.max_abs() > 0.0 && curvature_symmetry_defect(&t).max() > Self::TOLERANCE {
            return Err(invalid("tensor violates curvature symmetries"));
        }
        Ok(Self(t))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.0
    }

    pub fn into_tensor(self) -> DenseTensor {
        self.0
    }
}

/// Metric contraction of `a` and `b` over the given `(slot_a, slot_b)` pairs.
///
/// Free indices of `a` come first in the result, then those of `b`.
pub fn contract(
    a: &DenseTensor,
    b: &DenseTensor,
    pairs: &[(usize, usize)],
    metric: &SymmetricBilinear,
) -> Result<DenseTensor> {
    let n = metric.dim();
    if a.dim() != n || b.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: if a.dim() != n { a.dim() } else { b.dim() } });
    }
    for &(sa, sb) in pairs {
        if sa >= a.rank() {
            return Err(Error::InvalidSlot { slot: sa, rank: a.rank() });
        }
        if sb >= b.rank() {
            return Err(Error::InvalidSlot { slot: sb, rank: b.rank() });
        }
    }
    let distinct = |f: fn(&(usize, usize)) -> usize| {
        let mut s: Vec<usize> = pairs.iter().map(f).collect();
        s.sort_unstable();
        s.windows(2).all(|w| w[0] != w[1])
    };
    if !distinct(|p| p.0) || !distinct(|p| p.1) {
        return Err(invalid("a slot appears in more than one contraction pair"));
    }
    let g_inv = metric.inverse()?;

    let free_a: Vec<usize> = (0..a.rank()).filter(|s| pairs.iter().all(|p| p.0 != *s)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|s| pairs.iter().all(|p| p.1 != *s)).collect();
    let out_rank = free_a.len() + free_b.len();
    let mut out = DenseTensor::zeros(out_rank, n);

    let mut ia = vec![0usize; a.rank()];
    let mut ib = vec![0usize; b.rank()];
    let mut free = vec![0usize; out_rank];
    let mut summed = vec![0usize; 2 * pairs.len()];
    for o in 0..out.data.len() {
        for (k, &s) in free_a.iter().enumerate() {
            ia[s] = free[k];
        }
        for (k, &s) in free_b.iter().enumerate() {
            ib[s] = free[free_a.len() + k];
        }
        let mut acc = 0.0;
        summed.iter_mut().for_each(|v| *v = 0);
        loop {
            let mut w = 1.0;
            for (p, &(sa, sb)) in pairs.iter().enumerate() {
                let (alpha, beta) = (summed[2 * p], summed[2 * p + 1]);
                ia[sa] = alpha;
                ib[sb] = beta;
                w *= g_inv[(alpha, beta)];
            }
            if w != 0.0 {
                acc += w * a.get(&ia) * b.get(&ib);
            }
            if summed.is_empty() {
                break;
            }
            increment(&mut summed, n);
            if summed.iter().all(|&v| v == 0) {
                break;
            }
        }
        out.data[o] = acc;
        increment(&mut free, n);
    }
    Ok(out)
}

/// `(h ∘∧ k)_{ijkl} = h_ik k_jl − h_il k_jk + h_jl k_ik − h_jk k_il`.
pub fn kulkarni_nomizu(h: &SymmetricBilinear, k: &SymmetricBilinear) -> Result<DenseTensor> {
    let n = h.dim();
    if k.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: k.dim() });
    }
    Ok(kn_raw(h.tensor(), k.tensor()))
}

pub(crate) fn kn_raw(h: &DenseTensor, k: &DenseTensor) -> DenseTensor {
    let n = h.dim();
    let hd = h.data();
    let kd = k.data();
    let at = |m: &[f64], a: usize, b: usize| m[a * n + b];
    DenseTensor::from_fn(4, n, |ix| {
        let (i, j, p, q) = (ix[0], ix[1], ix[2], ix[3]);
        at(hd, i, p) * at(kd, j, q) - at(hd, i, q) * at(kd, j, p) + at(hd, j, q) * at(kd, i, p)
            - at(hd, j, p) * at(kd, i, q)
    })
}

/// `|a|_g`, the square root of the full metric self-contraction.
pub fn frobenius_norm(a: &DenseTensor, metric: &SymmetricBilinear) -> Result<f64> {
    if a.dim() != metric.dim() {
        return Err(Error::DimensionMismatch { expected: metric.dim(), found: a.dim() });
    }
    let g_inv = metric.inverse()?;
    let raised = a.raise_all(&g_inv)?;
    Ok(libm::sqrt(raised.dot(a)?.max(0.0)))
}

/// Upper-triangular `E` with `Eᵀ g E = I`, from the Cholesky factor `g = L Lᵀ`.
pub fn orthonormal_frame(g: &SymmetricBilinear) -> Result<DMatrix<f64>> {
    let chol = nalgebra::linalg::Cholesky::new(g.to_matrix()).ok_or(Error::DegenerateMetric { point: Vec::new() })?;
    let l = chol.l();
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(g.dim(), g.dim()))
        .ok_or(Error::DegenerateMetric { point: Vec::new() })?;
    Ok(l_inv.transpose())
}

/// Orthogonal projection of an arbitrary rank-4 tensor onto the curvature class:
/// antisymmetrize both pairs, symmetrize the pair exchange, remove the Bianchi part.
pub fn project_curvature(raw: &DenseTensor) -> Result<DenseTensor> {
    if raw.rank() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: raw.rank() });
    }
    let n = raw.dim();
    let anti = DenseTensor::from_fn(4, n, |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        0.25 * (raw.get(&[i, j, k, l]) - raw.get(&[j, i, k, l]) - raw.get(&[i, j, l, k]) + raw.get(&[j, i, l, k]))
    });
    let pair = DenseTensor::from_fn(4, n, |x| 0.5 * (anti.get(x) + anti.get(&[x[2], x[3], x[0], x[1]])));
    Ok(DenseTensor::from_fn(4, n, |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        let b = (pair.get(&[i, j, k, l]) + pair.get(&[i, k, l, j]) + pair.get(&[i, l, j, k])) / 3.0;
        pair.get(x) - b
    }))
}

/// Deterministic algebraic curvature tensor built from i.i.d. uniform(−1, 1) draws.
pub fn random_curvature_tensor(n: usize, seed: u64) -> Result<AlgebraicCurvatureTensor> {
    if n < 3 {
        return Err(invalid("random curvature tensors need n >= 3"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = DenseTensor::from_fn(4, n, |_| rng.random_range(-1.0..1.0));
    Ok(AlgebraicCurvatureTensor(project_curvature(&raw)?))
}

/// Random trace-free symmetric 2-tensor in an orthonormal frame.
pub fn random_traceless_symmetric(n: usize, rng: &mut impl Rng) -> SymmetricBilinear {
    let mut m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m = (&m + m.transpose()) * 0.5;
    let tr = m.trace() / n as f64;
    for i in 0..n {
        m[(i, i)] -= tr;
    }
    SymmetricBilinear::from_matrix(&m).expect("symmetrized matrix")
}

/// Deterministic orthogonal matrix (Q factor of a uniform random matrix).
pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

/// Ricci contraction `Ric_{ik} = g^{jl} R_{ijkl}`.
pub fn ricci_contraction(rm: &DenseTensor, g_inv: &DMatrix<f64>) -> DenseTensor {
    let n = rm.dim();
    DenseTensor::from_fn(2, n, |x| {
        let mut s = 0.0;
        for j in 0..n {
            for l in 0..n {
                let w = g_inv[(j, l)];
                if w != 0.0 {
                    s += w * rm.get(&[x[0], j, x[1], l]);
                }
            }
        }
        s
    })
}

/// Weyl part of a curvature tensor with respect to `g`:
/// `W = Rm − (1/(n−2)) Ric∘∧g + R/(2(n−1)(n−2)) g∘∧g`.
pub fn weyl_part(rm: &DenseTensor, g: &SymmetricBilinear) -> Result<DenseTensor> {
    let n = g.dim();
    if n < 3 {
        return Err(invalid("Weyl tensor needs n >= 3"));
    }
    let g_inv = g.inverse()?;
    let ric = ricci_contraction(rm, &g_inv);
    let r: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| g_inv[(i, j)] * ric.get(&[i, j])).sum();
    let nf = n as f64;
    let ric_g = kn_raw(&ric, g.tensor());
    let g_g = kn_raw(g.tensor(), g.tensor());
    rm.axpy(-1.0 / (nf - 2.0), &ric_g)?.axpy(r / (2.0 * (nf - 1.0) * (nf - 2.0)), &g_g)
}
