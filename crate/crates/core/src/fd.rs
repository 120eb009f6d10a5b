//! Fourth-order central finite differences of vector-valued fields.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;

const OFFSETS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];
const FIRST: [f64; 4] = [1.0, -8.0, 8.0, -1.0];

/// Center value, first partials and (optionally) the full Hessian of a
/// vector-valued field, each partial stored as a flat vector.
pub struct Partials {
    pub center: Vec<f64>,
    pub first: Vec<Vec<f64>>,
    pub second: Option<Vec<Vec<Vec<f64>>>>,
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(axis, dx) in moves {
        y[axis] += dx;
    }
    y
}

fn combine(acc: &mut [f64], c: f64, v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += c * b;
    }
}

/// Differentiates `field` at `x` with per-axis steps `h`.
///
/// First derivatives use the 4-point stencil, diagonal second derivatives
/// the 5-point stencil and mixed ones the 16-point tensor product of the
/// first-derivative stencil.
pub fn partials(
    x: &[f64],
    h: &[f64],
    second: bool,
    mut field: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<Partials> {
    let n = x.len();
    let center = field(x)?;
    let m = center.len();
    // axis samples at offsets −2h, −h, +h, +2h
    let mut axis_vals: Vec<[Vec<f64>; 4]> = Vec::with_capacity(n);
    for a in 0..n {
        let mut vals: [Vec<f64>; 4] = Default::default();
        for (slot, off) in OFFSETS.iter().enumerate() {
            vals[slot] = field(&shifted(x, &[(a, off * h[a])]))?;
        }
        axis_vals.push(vals);
    }
    let first = (0..n)
        .map(|a| {
            let mut d = vec![0.0; m];
            for s in 0..4 {
                combine(&mut d, FIRST[s] / (12.0 * h[a]), &axis_vals[a][s]);
            }
            d
        })
        .collect();

    let second = if second {
        let mut hess = vec![vec![vec![0.0; m]; n]; n];
        for a in 0..n {
            let v = &axis_vals[a];
            let d = &mut hess[a][a];
            let w = 1.0 / (12.0 * h[a] * h[a]);
            combine(d, -w, &v[0]);
            combine(d, 16.0 * w, &v[1]);
            combine(d, -30.0 * w, &center);
            combine(d, 16.0 * w, &v[2]);
            combine(d, -w, &v[3]);
        }
        for a in 0..n {
            for b in (a + 1)..n {
                let mut d = vec![0.0; m];
                let w = 1.0 / (144.0 * h[a] * h[b]);
                for (p, ca) in OFFSETS.iter().zip(FIRST) {
                    for (q, cb) in OFFSETS.iter().zip(FIRST) {
                        let val = field(&shifted(x, &[(a, p * h[a]), (b, q * h[b])]))?;
                        combine(&mut d, ca * cb * w, &val);
                    }
                }
                hess[b][a] = d.clone();
                hess[a][b] = d;
            }
        }
        Some(hess)
    } else {
        None
    };
    Ok(Partials { center, first, second })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives_are_exact_to_roundoff() {
        // quartic: the 4th-order stencils are exact up to degree 4 (first) / 5 (second)
        let f = |x: &[f64]| -> Result<Vec<f64>> {
            Ok(vec![x[0].powi(4) + 3.0 * x[0] * x[1].powi(2) - x[1], x[0] * x[1]])
        };
        let p = partials(&[0.3, -0.7], &[1e-2, 1e-2], true, f).unwrap();
        let (x, y) = (0.3_f64, -0.7_f64);
        assert!((p.first[0][0] - (4.0 * x.powi(3) + 3.0 * y * y)).abs() < 1e-11);
        assert!((p.first[1][0] - (6.0 * x * y - 1.0)).abs() < 1e-11);
        let h = p.second.unwrap();
        assert!((h[0][0][0] - 12.0 * x * x).abs() < 1e-8);
        assert!((h[0][1][0] - 6.0 * y).abs() < 1e-9);
        assert!((h[1][0][1] - 1.0).abs() < 1e-9);
        assert!((h[1][1][0] - 6.0 * x).abs() < 1e-8);
    }

    #[test]
    fn sine_converges_at_fourth_order() {
        let f = |x: &[f64]| -> Result<Vec<f64>> { Ok(vec![libm::sin(x[0])]) };
        let err = |h: f64| (partials(&[0.4], &[h], false, f).unwrap().first[0][0] - libm::cos(0.4)).abs();
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
    }
}
