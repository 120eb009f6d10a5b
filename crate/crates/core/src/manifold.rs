//! Closed manifolds: homogeneous presets, spheres in stereographic charts
//! and periodic or box-shaped coordinate charts.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chart::{self, AmbientForm, BoxChart, ChartMetric, DerivativeMode, FdSteps, SphereChart};
use crate::curvature::{CurvatureBundle, Invariants, PointCurvature, SecondOrder};
use crate::error::{invalid, Error, Result};
use crate::homogeneous::{HomogeneousKind, HomogeneousSpace};
use crate::tensor::DenseTensor;

/// A point on a manifold: chart index and coordinates. Homogeneous presets
/// have a single point with no coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub chart: usize,
    pub x: Vec<f64>,
}

/// A quadrature node with its weight (the volume element is included).
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub point: ChartPoint,
    pub weight: f64,
}

#[derive(Clone, Debug)]
enum Source {
    Homogeneous(HomogeneousSpace),
    Sphere(SphereChart),
    Box(BoxChart),
}

#[derive(Clone, Debug)]
pub struct Manifold {
    source: Source,
}

/// How much derivative information [`Manifold::for_each_node`] computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Depth {
    /// Curvature only; gradient fields of the bundle are zero.
    Pointwise,
    /// First covariant derivatives of the curvature fields.
    FirstOrder,
    /// Also the Ricci Hessian and `Δ|R̊|²`.
    SecondOrder,
}

/// Per-node data handed to integrand callbacks, in an orthonormal frame.
pub struct NodeData<'a> {
    pub node: &'a Node,
    pub bundle: &'a CurvatureBundle,
    pub invariants: &'a Invariants,
    pub second: Option<&'a SecondOrder>,
}

impl Manifold {
    pub fn round_sphere(n: usize, radius: f64) -> Result<Self> {
        Ok(Self::homogeneous(HomogeneousSpace::round_sphere(n, radius)?))
    }

    pub fn product_spheres(p: usize, r1: f64, q: usize, r2: f64) -> Result<Self> {
        Ok(Self::homogeneous(HomogeneousSpace::product_spheres(p, r1, q, r2)?))
    }

    pub fn flat_torus(periods: &[f64]) -> Result<Self> {
        Ok(Self::homogeneous(HomogeneousSpace::flat_torus(periods)?))
    }

    pub fn berger_sphere(l1: f64, l2: f64, l3: f64) -> Result<Self> {
        Ok(Self::homogeneous(HomogeneousSpace::berger_sphere([l1, l2, l3])?))
    }

    /// Round unit sphere with the ambient form `(1 + εψ)δ + ε e₀e₀ᵀ`,
    /// `ψ = y_n^mode + y₀y₁`, in stereographic charts.
    pub fn perturbed_sphere(n: usize, epsilon: f64, mode: u32) -> Result<Self> {
        Self::sphere_chart(n, AmbientForm::Perturbed { epsilon, mode })
    }

    pub fn sphere_chart(n: usize, form: AmbientForm) -> Result<Self> {
        Ok(Self { source: Source::Sphere(SphereChart::new(n, form)?) })
    }

    pub fn box_chart(chart: BoxChart) -> Self {
        Self { source: Source::Box(chart) }
    }

    pub fn homogeneous(space: HomogeneousSpace) -> Self {
        Self { source: Source::Homogeneous(space) }
    }

    pub fn dim(&self) -> usize {
        match &self.source {
            Source::Homogeneous(h) => h.dim(),
            Source::Sphere(s) => s.n,
            Source::Box(b) => b.dim(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.source, Source::Homogeneous(_))
    }

    pub fn homogeneous_space(&self) -> Option<&HomogeneousSpace> {
        match &self.source {
            Source::Homogeneous(h) => Some(h),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.source {
            Source::Homogeneous(h) => match h.kind() {
                HomogeneousKind::RoundSphere { n, radius } => format!("round_sphere(n={n}, r={radius})"),
                HomogeneousKind::ProductSpheres { p, r1, q, r2 } => {
                    format!("product_spheres(p={p}, r1={r1}, q={q}, r2={r2})")
                }
                HomogeneousKind::FlatTorus { periods } => format!("flat_torus(periods={periods:?})"),
                HomogeneousKind::Berger { lambda } => {
                    format!("berger_sphere({}, {}, {})", lambda[0], lambda[1], lambda[2])
                }
            },
            Source::Sphere(s) => {
                let scale = if s.scale == 1.0 { String::new() } else { format!(", scale={}", s.scale) };
                match &s.form {
                    AmbientForm::Round { radius } => format!("sphere_chart(n={}, r={radius}{scale})", s.n),
                    AmbientForm::Berger { lambda } => {
                        format!("berger_chart({}, {}, {}{scale})", lambda[0], lambda[1], lambda[2])
                    }
                    AmbientForm::Perturbed { epsilon, mode } => {
                        format!("perturbed_sphere(n={}, epsilon={epsilon}, mode={mode}{scale})", s.n)
                    }
                }
            }
            Source::Box(b) => format!("box_chart(dim={}, periodic={:?})", b.dim(), b.periodic()),
        }
    }

    /// Round metric on a sphere (closed form or chart), with its dimension.
    pub fn round_sphere_dim(&self) -> Option<usize> {
        match &self.source {
            Source::Homogeneous(h) => match h.kind() {
                HomogeneousKind::RoundSphere { n, .. } => Some(*n),
                _ => None,
            },
            Source::Sphere(s) => matches!(s.form, AmbientForm::Round { .. }).then_some(s.n),
            Source::Box(_) => None,
        }
    }

    /// Low-frequency functions at a point: ambient coordinates on sphere
    /// charts, first Fourier modes on box charts, none on homogeneous presets.
    pub fn low_modes(&self, p: &ChartPoint) -> Vec<f64> {
        match &self.source {
            Source::Homogeneous(_) => Vec::new(),
            Source::Sphere(s) => s.to_ambient(p.chart, &p.x),
            Source::Box(b) => {
                let mut out = Vec::new();
                for (a, &(lo, hi)) in b.domain().iter().enumerate() {
                    let u = (p.x[a] - lo) / (hi - lo);
                    if b.periodic()[a] {
                        out.push(libm::cos(2.0 * core::f64::consts::PI * u));
                        out.push(libm::sin(2.0 * core::f64::consts::PI * u));
                    } else {
                        out.push(libm::cos(core::f64::consts::PI * u));
                    }
                }
                out
            }
        }
    }

    /// `χ(M)` when the topology is known.
    pub fn euler_characteristic(&self) -> Option<i64> {
        match &self.source {
            Source::Homogeneous(h) => Some(h.euler_characteristic()),
            Source::Sphere(s) => Some(s.euler_characteristic()),
            Source::Box(b) => b.euler_characteristic(),
        }
    }

    /// Number of nodes per polar angle (sphere charts); ignored elsewhere.
    pub fn with_resolution(mut self, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(invalid("resolution must be at least 2"));
        }
        match &mut self.source {
            Source::Sphere(s) => s.resolution = nodes,
            Source::Box(b) => b.nodes.iter_mut().for_each(|k| *k = nodes),
            Source::Homogeneous(_) => {}
        }
        Ok(self)
    }

    pub fn resolution(&self) -> Option<usize> {
        match &self.source {
            Source::Sphere(s) => Some(s.resolution),
            Source::Box(b) => b.nodes.iter().copied().max(),
            Source::Homogeneous(_) => None,
        }
    }

    pub fn with_derivatives(mut self, mode: DerivativeMode) -> Self {
        match &mut self.source {
            Source::Sphere(s) => s.mode = mode,
            Source::Box(b) => b.mode = mode,
            Source::Homogeneous(_) => {}
        }
        self
    }

    pub fn with_fd_steps(mut self, steps: FdSteps) -> Self {
        match &mut self.source {
            Source::Sphere(s) => s.steps = steps,
            Source::Box(b) => b.steps = steps,
            Source::Homogeneous(_) => {}
        }
        self
    }

    pub fn fd_steps(&self) -> Option<FdSteps> {
        match &self.source {
            Source::Sphere(s) => Some(s.steps),
            Source::Box(b) => Some(b.steps),
            Source::Homogeneous(_) => None,
        }
    }

    /// The same manifold with metric `c·g`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid("metric scale must be positive and finite"));
        }
        let mut out = self.clone();
        match &mut out.source {
            Source::Homogeneous(h) => *h = h.scaled(c)?,
            Source::Sphere(s) => s.scale *= c,
            Source::Box(b) => b.scale *= c,
        }
        Ok(out)
    }

    /// Quadrature nodes. Homogeneous presets have one node carrying the
    /// exact volume.
    pub fn nodes(&self) -> Result<Vec<Node>> {
        match &self.source {
            Source::Homogeneous(h) => {
                Ok(alloc::vec![Node { point: ChartPoint { chart: 0, x: Vec::new() }, weight: h.volume() }])
            }
            Source::Sphere(s) => s
                .nodes()?
                .into_iter()
                .map(|(y, w)| {
                    let (chart, x) = s.from_ambient(&y);
                    Node { point: ChartPoint { chart, x }, weight: w }
                })
                .map(Ok)
                .collect(),
            Source::Box(b) => b
                .grid()
                .into_iter()
                .map(|(x, w)| {
                    let g = b.metric::<f64>(0, &x);
                    let n = b.dim();
                    let m = nalgebra::DMatrix::from_row_slice(n, n, &g);
                    let chol = nalgebra::linalg::Cholesky::new(m).ok_or(Error::DegenerateMetric { point: x.clone() })?;
                    let density: f64 = chol.l().diagonal().iter().product();
                    Ok(Node { point: ChartPoint { chart: 0, x }, weight: w * density })
                })
                .collect(),
        }
    }

    fn check_point(&self, p: &ChartPoint) -> Result<()> {
        let charts = match &self.source {
            Source::Homogeneous(_) => return Ok(()),
            Source::Sphere(_) => 2,
            Source::Box(_) => 1,
        };
        if p.chart >= charts {
            return Err(invalid(format!("chart index {} out of range", p.chart)));
        }
        if p.x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.x.len() });
        }
        if let Source::Box(b) = &self.source {
            for (a, (&v, &(lo, hi))) in p.x.iter().zip(b.domain()).enumerate() {
                if !b.periodic()[a] && !(lo..=hi).contains(&v) {
                    return Err(invalid(format!("coordinate {v} outside [{lo}, {hi}] on axis {a}")));
                }
            }
        }
        Ok(())
    }

    /// Christoffel symbols `Γ^k_{ij}` at `[k, i, j]` (frame connection
    /// coefficients for homogeneous presets).
    pub fn christoffel(&self, p: &ChartPoint) -> Result<DenseTensor> {
        self.check_point(p)?;
        match &self.source {
            Source::Homogeneous(h) => Ok(h.connection().clone()),
            Source::Sphere(s) => Ok(chart::point_curvature(s, p.chart, &p.x)?.christoffel),
            Source::Box(b) => Ok(chart::point_curvature(b, p.chart, &p.x)?.christoffel),
        }
    }

    /// Metric-jet curvature at a chart point (not available on homogeneous presets).
    pub fn point_curvature(&self, p: &ChartPoint) -> Result<PointCurvature> {
        self.check_point(p)?;
        match &self.source {
            Source::Homogeneous(_) => Err(Error::Unsupported("homogeneous presets have no coordinate chart".into())),
            Source::Sphere(s) => chart::point_curvature(s, p.chart, &p.x),
            Source::Box(b) => chart::point_curvature(b, p.chart, &p.x),
        }
    }

    /// Full curvature bundle at a point, in chart coordinates (orthonormal
    /// frame for homogeneous presets).
    pub fn curvature_bundle(&self, p: &ChartPoint) -> Result<CurvatureBundle> {
        self.check_point(p)?;
        match &self.source {
            Source::Homogeneous(h) => h.bundle(),
            Source::Sphere(s) => chart::bundle(s, p.chart, &p.x, s.steps.field),
            Source::Box(b) => chart::bundle(b, p.chart, &p.x, b.steps.field),
        }
    }

    /// Bundle plus second covariant derivatives of Ricci.
    pub fn second_order(&self, p: &ChartPoint) -> Result<(CurvatureBundle, SecondOrder)> {
        self.check_point(p)?;
        match &self.source {
            Source::Homogeneous(h) => {
                let b = h.bundle()?;
                let s = h.second_order(&b);
                Ok((b, s))
            }
            Source::Sphere(s) => chart::bundle_with_second_order(s, p.chart, &p.x, s.steps.field_second),
            Source::Box(b) => chart::bundle_with_second_order(b, p.chart, &p.x, b.steps.field_second),
        }
    }

    fn pointwise_bundle(&self, p: &ChartPoint) -> Result<CurvatureBundle> {
        match &self.source {
            Source::Homogeneous(h) => h.bundle(),
            _ => {
                let pc = self.point_curvature(p)?;
                CurvatureBundle::assemble(&p.x, &pc, &crate::curvature::FieldPartials::zeros(pc.dim()))
            }
        }
    }

    /// Visits every quadrature node with its orthonormal-frame bundle.
    pub fn for_each_node(&self, depth: Depth, mut f: impl FnMut(&NodeData<'_>) -> Result<()>) -> Result<()> {
        for node in self.nodes()? {
            let (bundle, second) = match depth {
                Depth::Pointwise => (self.pointwise_bundle(&node.point)?, None),
                Depth::FirstOrder => (self.curvature_bundle(&node.point)?, None),
                Depth::SecondOrder => {
                    let (b, s) = self.second_order(&node.point)?;
                    (b, Some(s))
                }
            };
            let e = crate::tensor::orthonormal_frame(&bundle.g)
                .map_err(|_| Error::DegenerateMetric { point: node.point.x.clone() })?;
            let ortho = bundle.in_frame(&e)?;
            let second = match second {
                Some(s) => Some(s.in_frame(&e)?),
                None => None,
            };
            let mut inv = Invariants::from_orthonormal(&ortho);
            if depth == Depth::Pointwise {
                inv.grad_traceless_sq = f64::NAN;
                inv.grad_abs_traceless_sq = f64::NAN;
                inv.grad_scalar_sq = f64::NAN;
                inv.cotton_sq = f64::NAN;
            }
            f(&NodeData { node: &node, bundle: &ortho, invariants: &inv, second: second.as_ref() })?;
        }
        Ok(())
    }

    /// `∫ f dv_g` for an integrand of the curvature invariants.
    pub fn integrate(&self, depth: Depth, mut f: impl FnMut(&Invariants) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        self.for_each_node(depth, |d| {
            let v = f(d.invariants);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("integrand at {:?}", d.node.point.x)));
            }
            acc += d.node.weight * v;
            Ok(())
        })?;
        Ok(acc)
    }

    /// Several integrals in one sweep.
    pub fn integrate_many<const K: usize>(
        &self,
        depth: Depth,
        mut f: impl FnMut(&NodeData<'_>) -> [f64; K],
    ) -> Result<[f64; K]> {
        let mut acc = [0.0; K];
        self.for_each_node(depth, |d| {
            let v = f(d);
            for (a, x) in acc.iter_mut().zip(v) {
                if !x.is_finite() {
                    return Err(Error::NonFinite(format!("integrand at {:?}", d.node.point.x)));
                }
                *a += d.node.weight * x;
            }
            Ok(())
        })?;
        Ok(acc)
    }

    pub fn volume(&self) -> Result<f64> {
        match &self.source {
            Source::Homogeneous(h) => Ok(h.volume()),
            _ => Ok(self.nodes()?.iter().map(|n| n.weight).sum()),
        }
    }
}
