//! Curvature engine for quadratic curvature functionals on closed manifolds.
//!
//! The crate is `no_std` (with `alloc`). It evaluates curvature tensors of
//! explicit Riemannian metrics, integrates the functional
//! `F_t(g) = ∫ |Ric|² + t R²`, measures Euler–Lagrange residuals and the
//! integral identities that hold for its critical metrics, and evaluates the
//! pointwise and integral pinching conditions of the rigidity theorems.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod chart;
pub mod curvature;
pub mod error;
pub mod fd;
pub mod functional;
pub mod homogeneous;
pub mod identities;
pub mod manifold;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod rigidity;
pub mod scalar;
pub mod tensor;

pub use chart::{AmbientForm, DerivativeMode, FdSteps};
pub use error::{Error, Result};
pub use manifold::{ChartPoint, Depth, Manifold};
