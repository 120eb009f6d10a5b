//! Random-instance checks of the pointwise algebraic estimate
//! `|−W_{ijkl}R̊_{jl}R̊_{ik} + λ R̊_{ij}R̊_{jk}R̊_{ki}| ≤ √((n−2)/(2(n−1))) |W + (λ/√(2n)) R̊∘∧g| |R̊|²`
//! and of the norm splitting `|W + (λ/√(2n)) R̊∘∧g|² = |W|² + (2(n−2)λ²/n)|R̊|²`.
//!
//! Everything is evaluated in an orthonormal frame on flat `n⁴` arrays so a
//! sweep of 10⁵ draws per dimension stays cheap.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::tensor::random_traceless_symmetric;

/// Relative slack below which `lhs > rhs` is attributed to rounding.
pub const ROUNDING_SLACK: f64 = 1e-12;

#[inline]
fn at(n: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * n + j) * n + k) * n + l
}

/// Projection of a raw `n⁴` array onto the curvature symmetry class, in the
/// same order as [`crate::tensor::project_curvature`].
pub fn project_flat(n: usize, raw: &[f64]) -> Vec<f64> {
    let len = n * n * n * n;
    let mut anti = vec![0.0; len];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    anti[at(n, i, j, k, l)] = 0.25
                        * (raw[at(n, i, j, k, l)] - raw[at(n, j, i, k, l)] - raw[at(n, i, j, l, k)]
                            + raw[at(n, j, i, l, k)]);
                }
            }
        }
    }
    let mut pair = vec![0.0; len];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    pair[at(n, i, j, k, l)] = 0.5 * (anti[at(n, i, j, k, l)] + anti[at(n, k, l, i, j)]);
                }
            }
        }
    }
    let mut out = vec![0.0; len];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let b = (pair[at(n, i, j, k, l)] + pair[at(n, i, k, l, j)] + pair[at(n, i, l, j, k)]) / 3.0;
                    out[at(n, i, j, k, l)] = pair[at(n, i, j, k, l)] - b;
                }
            }
        }
    }
    out
}

/// Adds `c·(h∘∧δ)` to `t` in place for a symmetric `h` stored row-major.
fn add_kn_identity(n: usize, t: &mut [f64], h: &[f64], c: f64) {
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                t[at(n, i, j, m, j)] += c * h[i * n + m];
                t[at(n, i, j, j, m)] -= c * h[i * n + m];
                t[at(n, i, j, i, m)] += c * h[j * n + m];
                t[at(n, i, j, m, i)] -= c * h[j * n + m];
            }
        }
    }
}

/// Weyl part of a curvature-class array in an orthonormal frame.
pub fn weyl_flat(n: usize, rm: &[f64]) -> Vec<f64> {
    let mut ric = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            ric[i * n + k] = (0..n).map(|j| rm[at(n, i, j, k, j)]).sum();
        }
    }
    let r: f64 = (0..n).map(|i| ric[i * n + i]).sum();
    let nf = n as f64;
    let c_ric = 1.0 / (nf - 2.0);
    let c_r = r / (2.0 * (nf - 1.0) * (nf - 2.0));
    let id: Vec<f64> = (0..n * n).map(|x| if x / n == x % n { 1.0 } else { 0.0 }).collect();
    let mut w = rm.to_vec();
    add_kn_identity(n, &mut w, &ric, -c_ric);
    add_kn_identity(n, &mut w, &id, c_r);
    w
}

/// One evaluated `(W, R̊, λ)` instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateSample {
    pub lhs: f64,
    pub rhs: f64,
    /// `|W + (λ/√(2n)) R̊∘∧g|²` by direct summation.
    pub combined_sq: f64,
    /// `|W|² + (2(n−2)λ²/n)|R̊|²`.
    pub split_sq: f64,
}

impl EstimateSample {
    pub fn violates(&self) -> bool {
        self.lhs > self.rhs * (1.0 + ROUNDING_SLACK)
    }

    pub fn split_relative_error(&self) -> f64 {
        let scale = self.combined_sq.abs().max(self.split_sq.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.combined_sq - self.split_sq).abs() / scale
        }
    }
}

/// Both sides of the estimate and both forms of the combined norm for a
/// trace-free `w`, trace-free symmetric `rc` (row-major `n×n`) and `lambda`.
pub fn evaluate_estimate(n: usize, w: &[f64], rc: &[f64], lambda: f64) -> EstimateSample {
    let nf = n as f64;
    let mu = lambda / libm::sqrt(2.0 * nf);
    let mut combined = w.to_vec();
    add_kn_identity(n, &mut combined, rc, mu);
    let combined_sq: f64 = combined.iter().map(|x| x * x).sum();
    let w_sq: f64 = w.iter().map(|x| x * x).sum();
    let mut wrr = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    wrr += w[at(n, i, j, k, l)] * rc[j * n + l] * rc[i * n + k];
                }
            }
        }
    }
    let rc_sq: f64 = rc.iter().map(|x| x * x).sum();
    let mut cubed = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                cubed += rc[i * n + j] * rc[j * n + k] * rc[k * n + i];
            }
        }
    }
    let lhs = (-wrr + lambda * cubed).abs();
    let rhs = libm::sqrt((nf - 2.0) / (2.0 * (nf - 1.0))) * libm::sqrt(combined_sq) * rc_sq;
    let split_sq = w_sq + 2.0 * (nf - 2.0) * lambda * lambda / nf * rc_sq;
    EstimateSample { lhs, rhs, combined_sq, split_sq }
}

/// Draws one instance: `W` is the Weyl part of a projected uniform(−1, 1)
/// array scaled by `10^u`, `u ∈ [−2, 1]`; `R̊` is a random trace-free symmetric
/// matrix; `λ` is uniform in `[−4, 4]`.
pub fn draw_instance(n: usize, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>, f64) {
    let raw: Vec<f64> = (0..n * n * n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let scale = libm::pow(10.0, rng.random_range(-2.0..1.0));
    let w: Vec<f64> = weyl_flat(n, &project_flat(n, &raw)).into_iter().map(|x| x * scale).collect();
    let rc = random_traceless_symmetric(n, rng).to_matrix();
    let rc: Vec<f64> = (0..n * n).map(|x| rc[(x / n, x % n)]).collect();
    let lambda = rng.random_range(-4.0..4.0);
    (w, rc, lambda)
}

/// Aggregate over a sweep in one dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateSweep {
    pub dim: usize,
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen.
    pub max_ratio: f64,
    pub max_split_error: f64,
}

impl EstimateSweep {
    pub fn passed(&self, split_tol: f64) -> bool {
        self.violations == 0 && self.max_split_error < split_tol
    }
}

pub fn estimate_sweep(n: usize, samples: usize, seed: u64) -> Result<EstimateSweep> {
    if n < 3 {
        return Err(invalid("the estimate needs n >= 3"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut out = EstimateSweep { dim: n, samples, violations: 0, max_ratio: 0.0, max_split_error: 0.0 };
    for _ in 0..samples {
        let (w, rc, lambda) = draw_instance(n, &mut rng);
        let s = evaluate_estimate(n, &w, &rc, lambda);
        if s.violates() {
            out.violations += 1;
        }
        if s.rhs > 0.0 {
            out.max_ratio = out.max_ratio.max(s.lhs / s.rhs);
        }
        out.max_split_error = out.max_split_error.max(s.split_relative_error());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{random_curvature_tensor, weyl_part, SymmetricBilinear};

    #[test]
    fn flat_path_matches_tensor_path() {
        for n in 3..=5 {
            let seed = 17 + n as u64;
            let reference = random_curvature_tensor(n, seed).unwrap();
            let w_ref = weyl_part(reference.tensor(), &SymmetricBilinear::identity(n)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = (0..n * n * n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let rm = project_flat(n, &raw);
            let w = weyl_flat(n, &rm);
            for (a, b) in rm.iter().zip(reference.tensor().data()) {
                assert!((a - b).abs() < 1e-14);
            }
            for (a, b) in w.iter().zip(w_ref.data()) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn three_dimensional_weyl_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (w, _, _) = draw_instance(3, &mut rng);
        assert!(w.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn small_sweep_is_clean() {
        for n in 3..=8 {
            let s = estimate_sweep(n, 200, 1).unwrap();
            assert!(s.passed(1e-10), "{s:?}");
            assert!(s.max_ratio > 0.0 && s.max_ratio <= 1.0);
        }
    }
}
