//! Scalar types that metric evaluators are generic over.
//!
//! Metric fields are written once against [`Scalar`] and evaluated either on
//! plain `f64` (finite-difference pipeline) or on [`HyperDual`] numbers, which
//! carry exact first and mixed second partial derivatives along two seeded
//! directions.

use core::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn re(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;

    fn powi(self, k: u32) -> Self {
        let mut acc = Self::cst(1.0);
        for _ in 0..k {
            acc = acc * self;
        }
        acc
    }

    fn scale(self, c: f64) -> Self {
        self * Self::cst(c)
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        libm::cos(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// Hyper-dual number `re + d1·ε₁ + d2·ε₂ + d12·ε₁ε₂` with `ε₁² = ε₂² = 0`.
///
/// Seeding `x_a` with `d1 = 1` and `x_b` with `d2 = 1` yields `∂_a f`, `∂_b f`
/// and `∂_a ∂_b f` with no truncation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperDual {
    pub re: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl HyperDual {
    pub const fn new(re: f64, d1: f64, d2: f64, d12: f64) -> Self {
        Self { re, d1, d2, d12 }
    }

    /// Applies a scalar function given its value and first two derivatives at `re`.
    #[inline]
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            re: f0,
            d1: f1 * self.d1,
            d2: f1 * self.d2,
            d12: f1 * self.d12 + f2 * self.d1 * self.d2,
        }
    }
}

impl Add for HyperDual {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.d1 + o.d1, self.d2 + o.d2, self.d12 + o.d12)
    }
}

impl Sub for HyperDual {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.d1 - o.d1, self.d2 - o.d2, self.d12 - o.d12)
    }
}

impl Mul for HyperDual {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re,
            self.re * o.d1 + self.d1 * o.re,
            self.re * o.d2 + self.d2 * o.re,
            self.re * o.d12 + self.d1 * o.d2 + self.d2 * o.d1 + self.d12 * o.re,
        )
    }
}

impl Div for HyperDual {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.re;
        let recip = o.chain(inv, -inv * inv, 2.0 * inv * inv * inv);
        self * recip
    }
}

impl Neg for HyperDual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.d1, -self.d2, -self.d12)
    }
}

impl Scalar for HyperDual {
    #[inline]
    fn cst(v: f64) -> Self {
        Self::new(v, 0.0, 0.0, 0.0)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    fn sin(self) -> Self {
        let (s, c) = (libm::sin(self.re), libm::cos(self.re));
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = (libm::sin(self.re), libm::cos(self.re));
        self.chain(c, -s, -c)
    }
    fn sqrt(self) -> Self {
        let r = libm::sqrt(self.re);
        self.chain(r, 0.5 / r, -0.25 / (r * self.re))
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        Self::new(self.re * c, self.d1 * c, self.d2 * c, self.d12 * c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f<S: Scalar>(x: S, y: S) -> S {
        x.sin() * y.powi(3) + (x * y).sqrt() / (S::cst(1.0) + x * x)
    }

    #[test]
    fn hyperdual_matches_closed_form_partials() {
        let (x0, y0) = (0.7, 1.3);
        let x = HyperDual::new(x0, 1.0, 0.0, 0.0);
        let y = HyperDual::new(y0, 0.0, 1.0, 0.0);
        let v = f(x, y);

        // d/dx, d/dy, d2/dxdy by hand
        let s = libm::sqrt(x0 * y0);
        let q = 1.0 + x0 * x0;
        let fx = libm::cos(x0) * y0.powi(3) + (0.5 * y0 / s) / q - s * 2.0 * x0 / (q * q);
        let fy = libm::sin(x0) * 3.0 * y0 * y0 + (0.5 * x0 / s) / q;
        let fxy = libm::cos(x0) * 3.0 * y0 * y0 + (0.25 / s) / q - (0.5 * x0 / s) * 2.0 * x0 / (q * q);
        assert!((v.re - f(x0, y0)).abs() < 1e-14);
        assert!((v.d1 - fx).abs() < 1e-12);
        assert!((v.d2 - fy).abs() < 1e-12);
        assert!((v.d12 - fxy).abs() < 1e-12);
    }

    #[test]
    fn same_direction_seed_gives_second_derivative() {
        let x = HyperDual::new(0.4, 1.0, 1.0, 0.0);
        let v = x.cos();
        assert!((v.d12 + libm::cos(0.4)).abs() < 1e-15);
    }
}
