//! Coordinate-chart metrics and the finite-difference curvature pipeline.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::curvature::{ricci_hessian, CurvatureBundle, FieldPartials, MetricJet, PointCurvature, SecondOrder};
use crate::error::{invalid, Error, Result};
use crate::fd;
use crate::scalar::{HyperDual, Scalar};
use crate::tensor::DenseTensor;

/// How the metric 2-jet is obtained at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Fourth-order central differences of the metric components.
    #[default]
    FiniteDifference,
    /// Hyper-dual evaluation of the metric formula (no truncation error).
    Exact,
}

/// Finite-difference steps, relative to each axis' length scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdSteps {
    /// Step for the metric 2-jet.
    pub metric: f64,
    /// Step for first derivatives of curvature fields.
    pub field: f64,
    /// Step for second derivatives of curvature fields.
    pub field_second: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self { metric: 2e-3, field: 5e-3, field_second: 1e-2 }
    }
}

/// A metric written in coordinates on one or more charts.
pub(crate) trait ChartMetric {
    fn dim(&self) -> usize;
    fn metric<S: Scalar>(&self, chart: usize, x: &[S]) -> Vec<S>;
    fn mode(&self) -> DerivativeMode;
    /// Metric-jet and field steps at `x` for each axis.
    fn steps(&self, chart: usize, x: &[f64], field_step: f64) -> Result<(Vec<f64>, Vec<f64>)>;
}

fn exact_jet<M: ChartMetric>(m: &M, chart: usize, x: &[f64]) -> MetricJet {
    let n = m.dim();
    let mut jet = MetricJet::zeros(n);
    for a in 0..n {
        for b in a..n {
            let y: Vec<HyperDual> = (0..n)
                .map(|k| HyperDual::new(x[k], if k == a { 1.0 } else { 0.0 }, if k == b { 1.0 } else { 0.0 }, 0.0))
                .collect();
            let g = m.metric(chart, &y);
            for i in 0..n {
                for j in 0..n {
                    let v = g[i * n + j];
                    if a == 0 && b == 0 {
                        jet.g[i * n + j] = v.re;
                    }
                    if a == b {
                        jet.dg[(a * n + i) * n + j] = v.d1;
                    }
                    jet.ddg[((a * n + b) * n + i) * n + j] = v.d12;
                    jet.ddg[((b * n + a) * n + i) * n + j] = v.d12;
                }
            }
        }
    }
    jet
}

fn fd_jet<M: ChartMetric>(m: &M, chart: usize, x: &[f64], h: &[f64]) -> Result<MetricJet> {
    let n = m.dim();
    let p = fd::partials(x, h, true, |y| Ok(m.metric::<f64>(chart, y)))?;
    let mut jet = MetricJet::zeros(n);
    jet.g.copy_from_slice(&p.center);
    for a in 0..n {
        jet.dg[a * n * n..(a + 1) * n * n].copy_from_slice(&p.first[a]);
    }
    let second = p.second.expect("requested second derivatives");
    for a in 0..n {
        for b in 0..n {
            let o = (a * n + b) * n * n;
            jet.ddg[o..o + n * n].copy_from_slice(&second[a][b]);
        }
    }
    Ok(jet)
}

pub(crate) fn metric_jet<M: ChartMetric>(m: &M, chart: usize, x: &[f64]) -> Result<MetricJet> {
    check_point(m, chart, x)?;
    match m.mode() {
        DerivativeMode::Exact => Ok(exact_jet(m, chart, x)),
        DerivativeMode::FiniteDifference => {
            let (h, _) = m.steps(chart, x, 0.0)?;
            fd_jet(m, chart, x, &h)
        }
    }
}

fn check_point<M: ChartMetric>(m: &M, chart: usize, x: &[f64]) -> Result<()> {
    if x.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: x.len() });
    }
    let g = m.metric::<f64>(chart, x);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(alloc::format!("metric at {x:?}")));
    }
    Ok(())
}

pub(crate) fn point_curvature<M: ChartMetric>(m: &M, chart: usize, x: &[f64]) -> Result<PointCurvature> {
    PointCurvature::from_jet(&metric_jet(m, chart, x)?, x)
}

pub(crate) fn bundle<M: ChartMetric>(m: &M, chart: usize, x: &[f64], field_step: f64) -> Result<CurvatureBundle> {
    let n = m.dim();
    let pc = point_curvature(m, chart, x)?;
    let (_, h) = m.steps(chart, x, field_step)?;
    let p = fd::partials(x, &h, false, |y| Ok(point_curvature(m, chart, y)?.field_values()))?;
    let fp = FieldPartials::from_flat(n, &p.first)?;
    CurvatureBundle::assemble(x, &pc, &fp)
}

pub(crate) fn bundle_with_second_order<M: ChartMetric>(
    m: &M,
    chart: usize,
    x: &[f64],
    field_step: f64,
) -> Result<(CurvatureBundle, SecondOrder)> {
    let n = m.dim();
    let pc = point_curvature(m, chart, x)?;
    let (_, h) = m.steps(chart, x, field_step)?;
    let p = fd::partials(x, &h, true, |y| Ok(point_curvature(m, chart, y)?.field_values()))?;
    let fp = FieldPartials::from_flat(n, &p.first)?;
    let bundle = CurvatureBundle::assemble(x, &pc, &fp)?;

    let n4 = n.pow(4);
    let n2 = n * n;
    let second = p.second.expect("requested second derivatives");
    let dd_ricci: Vec<Vec<DenseTensor>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| DenseTensor::from_vec(2, n, second[a][b][n4..n4 + n2].to_vec()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let hess = ricci_hessian(&pc.ricci, &fp.ricci, &dd_ricci, &pc.christoffel, &pc.christoffel_partials);

    // Laplace–Beltrami of |R̊|²: g^{ab}(∂_a∂_b f − Γ^k_{ab} ∂_k f)
    let last = n4 + n2;
    let mut lap = 0.0;
    for a in 0..n {
        for b in 0..n {
            let mut v = second[a][b][last];
            for k in 0..n {
                v -= pc.christoffel.get(&[k, a, b]) * p.first[k][last];
            }
            lap += pc.g_inv[(a, b)] * v;
        }
    }
    Ok((bundle, SecondOrder { ricci_hessian: hess, laplacian_traceless_sq: lap }))
}

// ---------------------------------------------------------------------------
// Spheres through stereographic charts

/// Symmetric form on `R^{n+1}` whose restriction to `TS^n` is the metric.
#[derive(Clone, Debug, PartialEq)]
pub enum AmbientForm {
    Round { radius: f64 },
    /// Left-invariant Berger form on `S³ ⊂ H`; `(1,1,1)` is the unit round metric.
    Berger { lambda: [f64; 3] },
    /// `(1 + εψ)δ + ε e₀e₀ᵀ` with `ψ(y) = y_n^mode + y₀y₁`.
    Perturbed { epsilon: f64, mode: u32 },
}

/// Largest `|ε|` accepted by [`AmbientForm::Perturbed`]; keeps the form
/// positive definite since `|ψ| ≤ 3/2` on the unit sphere.
pub const MAX_PERTURBATION: f64 = 0.4;

impl AmbientForm {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            AmbientForm::Round { radius } if !(*radius > 0.0) || !radius.is_finite() => {
                Err(invalid("sphere radius must be positive"))
            }
            AmbientForm::Berger { lambda } if n != 3 || lambda.iter().any(|l| !(*l > 0.0) || !l.is_finite()) => {
                Err(invalid("Berger form needs n = 3 and positive eigenvalues"))
            }
            AmbientForm::Perturbed { epsilon, mode } if !(epsilon.abs() < MAX_PERTURBATION) || *mode == 0 => {
                Err(invalid(alloc::format!("perturbation needs |ε| < {MAX_PERTURBATION} and mode ≥ 1")))
            }
            _ => Ok(()),
        }
    }

    fn eval<S: Scalar>(&self, y: &[S]) -> Vec<S> {
        let d = y.len();
        let mut g = vec![S::cst(0.0); d * d];
        match self {
            AmbientForm::Round { radius } => {
                for i in 0..d {
                    g[i * d + i] = S::cst(radius * radius);
                }
            }
            AmbientForm::Berger { lambda } => {
                let v = quaternion_frame(y);
                for (k, vk) in v.iter().enumerate() {
                    for i in 0..4 {
                        for j in 0..4 {
                            g[i * 4 + j] = g[i * 4 + j] + vk[i] * vk[j] * S::cst(lambda[k]);
                        }
                    }
                }
            }
            AmbientForm::Perturbed { epsilon, mode } => {
                let psi = y[d - 1].powi(*mode) + y[0] * y[1];
                let diag = S::cst(1.0) + psi.scale(*epsilon);
                for i in 0..d {
                    g[i * d + i] = diag;
                }
                g[0] = g[0] + S::cst(*epsilon);
            }
        }
        g
    }
}

/// `y·i, y·j, y·k` for `y = y₀ + y₁i + y₂j + y₃k`.
fn quaternion_frame<S: Scalar>(y: &[S]) -> [[S; 4]; 3] {
    let (a, b, c, d) = (y[0], y[1], y[2], y[3]);
    [[-b, a, d, -c], [-c, -d, a, b], [-d, c, -b, a]]
}

/// `S^n` covered by the two stereographic charts; chart 0 projects from
/// the north pole (`y_n = +1`) and is used where `y_n ≤ 0`, chart 1
/// projects from the south pole and is used elsewhere.
#[derive(Clone, Debug)]
pub struct SphereChart {
    pub(crate) n: usize,
    pub(crate) form: AmbientForm,
    pub(crate) scale: f64,
    pub(crate) resolution: usize,
    pub(crate) steps: FdSteps,
    pub(crate) mode: DerivativeMode,
}

/// Default number of Gauss–Legendre nodes per polar angle.
pub const DEFAULT_SPHERE_RESOLUTION: usize = 12;

impl SphereChart {
    pub fn new(n: usize, form: AmbientForm) -> Result<Self> {
        if n < 2 {
            return Err(invalid("sphere dimension must be at least 2"));
        }
        form.validate(n)?;
        Ok(Self {
            n,
            form,
            scale: 1.0,
            resolution: DEFAULT_SPHERE_RESOLUTION,
            steps: FdSteps::default(),
            mode: DerivativeMode::FiniteDifference,
        })
    }

    pub fn form(&self) -> &AmbientForm {
        &self.form
    }

    /// Ambient point of chart coordinates `x`.
    pub fn to_ambient<S: Scalar>(&self, chart: usize, x: &[S]) -> Vec<S> {
        let mut s = S::cst(0.0);
        for v in x {
            s = s + *v * *v;
        }
        let d = S::cst(1.0) + s;
        let mut y: Vec<S> = x.iter().map(|v| v.scale(2.0) / d).collect();
        let last = (s - S::cst(1.0)) / d;
        y.push(if chart == 0 { last } else { -last });
        y
    }

    /// Chart and coordinates of an ambient unit vector.
    pub fn from_ambient(&self, y: &[f64]) -> (usize, Vec<f64>) {
        let n = self.n;
        let last = y[n];
        if last <= 0.0 {
            (0, y[..n].iter().map(|v| v / (1.0 - last)).collect())
        } else {
            (1, y[..n].iter().map(|v| v / (1.0 + last)).collect())
        }
    }

    /// Hyperspherical product rule: Gauss–Legendre in the `n−1` polar angles,
    /// equispaced in the azimuth. Returns ambient points with weights that
    /// include the metric volume element.
    pub(crate) fn nodes(&self) -> Result<Vec<(Vec<f64>, f64)>> {
        let n = self.n;
        let k = self.resolution.max(2);
        let (theta, wt) = crate::quadrature::gauss_legendre_on(k, 0.0, PI);
        let (phi, wp) = crate::quadrature::periodic_on(2 * k, 0.0, 2.0 * PI);
        let mut out = Vec::new();
        let mut idx = vec![0usize; n - 1];
        loop {
            for (p, w_phi) in phi.iter().zip(&wp) {
                let mut y = vec![0.0; n + 1];
                let mut sines = 1.0;
                let mut w = *w_phi;
                for (level, &i) in idx.iter().enumerate() {
                    let th = theta[i];
                    y[level] = sines * libm::cos(th);
                    w *= wt[i] * libm::pow(libm::sin(th), (n - 1 - level) as f64);
                    sines *= libm::sin(th);
                }
                y[n - 1] = sines * libm::cos(*p);
                y[n] = sines * libm::sin(*p);
                let density = self.ambient_density(&y)?;
                out.push((y, w * density));
            }
            if !advance(&mut idx, k) {
                break;
            }
        }
        Ok(out)
    }

    /// `√det(Bᵀ G B)` for an orthonormal basis `B` of `y^⊥`, times the scale factor.
    fn ambient_density(&self, y: &[f64]) -> Result<f64> {
        let d = y.len();
        let n = d - 1;
        let g = self.form.eval(y);
        // Householder reflection with H·y = ∓e_n; its other columns span y^⊥
        let sign = if y[n] >= 0.0 { 1.0 } else { -1.0 };
        let mut v = y.to_vec();
        v[n] += sign;
        let vv: f64 = v.iter().map(|a| a * a).sum();
        let h = |i: usize, j: usize| (if i == j { 1.0 } else { 0.0 }) - 2.0 * v[i] * v[j] / vv;
        let b = nalgebra::DMatrix::from_fn(d, n, h);
        let gm = nalgebra::DMatrix::from_row_slice(d, d, &g);
        let red = b.transpose() * gm * b;
        let chol = nalgebra::linalg::Cholesky::new(red).ok_or(Error::DegenerateMetric { point: y.to_vec() })?;
        let det_sqrt: f64 = chol.l().diagonal().iter().product();
        Ok(det_sqrt * libm::pow(self.scale, n as f64 / 2.0))
    }

    pub fn euler_characteristic(&self) -> i64 {
        if self.n % 2 == 0 {
            2
        } else {
            0
        }
    }
}

/// Odometer increment; false after the last multi-index.
pub(crate) fn advance(idx: &mut [usize], k: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < k {
            return true;
        }
        *slot = 0;
    }
    false
}

impl ChartMetric for SphereChart {
    fn dim(&self) -> usize {
        self.n
    }

    fn metric<S: Scalar>(&self, chart: usize, x: &[S]) -> Vec<S> {
        let n = self.n;
        let mut s = S::cst(0.0);
        for v in x {
            s = s + *v * *v;
        }
        let d = S::cst(1.0) + s;
        let d2 = d * d;
        let sign = if chart == 0 { 1.0 } else { -1.0 };
        // J[a][i] = ∂_i y_a
        let mut jac = vec![S::cst(0.0); (n + 1) * n];
        for a in 0..n {
            for i in 0..n {
                let mut v = (x[a] * x[i]).scale(-4.0) / d2;
                if a == i {
                    v = v + S::cst(2.0) / d;
                }
                jac[a * n + i] = v;
            }
        }
        for i in 0..n {
            jac[n * n + i] = x[i].scale(4.0 * sign) / d2;
        }
        let y = self.to_ambient(chart, x);
        let big = self.form.eval(&y);
        let dd = n + 1;
        let mut gj = vec![S::cst(0.0); dd * n];
        for a in 0..dd {
            for j in 0..n {
                let mut acc = S::cst(0.0);
                for b in 0..dd {
                    acc = acc + big[a * dd + b] * jac[b * n + j];
                }
                gj[a * n + j] = acc;
            }
        }
        let mut g = vec![S::cst(0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = S::cst(0.0);
                for a in 0..dd {
                    acc = acc + jac[a * n + i] * gj[a * n + j];
                }
                let v = acc.scale(self.scale);
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        g
    }

    fn mode(&self) -> DerivativeMode {
        self.mode
    }

    fn steps(&self, _chart: usize, _x: &[f64], field_step: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((vec![self.steps.metric; self.n], vec![field_step; self.n]))
    }
}

// ---------------------------------------------------------------------------
// Box charts with coefficient-table metrics

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Factor {
    /// `x_axis^exp`
    Pow { axis: usize, exp: u32 },
    /// `cos(2πk (x_axis − lo)/L)`
    Cos { axis: usize, k: u32 },
    /// `sin(2πk (x_axis − lo)/L)`
    Sin { axis: usize, k: u32 },
}

impl Factor {
    fn axis(&self) -> usize {
        match *self {
            Factor::Pow { axis, .. } | Factor::Cos { axis, .. } | Factor::Sin { axis, .. } => axis,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub factors: Vec<Factor>,
}

/// `g_ij(x) = Σ_terms coeff · Π factors` for each `i ≤ j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricTable {
    pub dim: usize,
    /// `(i, j, terms)` with `i ≤ j`; missing entries are zero.
    pub entries: Vec<(usize, usize, Vec<Term>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisRule {
    GaussLegendre,
    Trapezoid,
}

#[derive(Clone, Debug)]
pub struct BoxChart {
    pub(crate) domain: Vec<(f64, f64)>,
    pub(crate) periodic: Vec<bool>,
    pub(crate) table: MetricTable,
    pub(crate) nodes: Vec<usize>,
    pub(crate) rules: Vec<AxisRule>,
    pub(crate) scale: f64,
    pub(crate) steps: FdSteps,
    pub(crate) mode: DerivativeMode,
}

/// Smallest admissible metric step relative to the axis length.
const MIN_RELATIVE_STEP: f64 = 1e-6;

impl BoxChart {
    pub fn new(
        domain: Vec<(f64, f64)>,
        periodic: Vec<bool>,
        table: MetricTable,
        nodes: Vec<usize>,
        rules: Option<Vec<AxisRule>>,
    ) -> Result<Self> {
        let n = domain.len();
        if n < 2 || periodic.len() != n || nodes.len() != n || table.dim != n {
            return Err(invalid("box chart: domain, periodic, nodes and metric must share one dimension ≥ 2"));
        }
        for (a, (lo, hi)) in domain.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(invalid(alloc::format!("box chart: empty or infinite interval on axis {a}")));
            }
        }
        if nodes.contains(&0) {
            return Err(invalid("box chart: every axis needs at least one node"));
        }
        for (i, j, terms) in &table.entries {
            if i > j || *j >= n {
                return Err(invalid(alloc::format!("box chart: bad metric entry ({i}, {j})")));
            }
            for term in terms {
                if !term.coeff.is_finite() {
                    return Err(invalid("box chart: non-finite coefficient"));
                }
                for f in &term.factors {
                    if f.axis() >= n {
                        return Err(invalid(alloc::format!("box chart: factor on missing axis {}", f.axis())));
                    }
                    if let Factor::Pow { axis, exp } = f {
                        if periodic[*axis] && *exp > 0 {
                            return Err(invalid(alloc::format!(
                                "box chart: polynomial factor on periodic axis {axis} is not periodic"
                            )));
                        }
                    }
                }
            }
        }
        let rules = match rules {
            Some(r) if r.len() == n => r,
            Some(_) => return Err(invalid("box chart: one quadrature rule per axis")),
            None => periodic.iter().map(|&p| if p { AxisRule::Trapezoid } else { AxisRule::GaussLegendre }).collect(),
        };
        let chart = Self {
            domain,
            periodic,
            table,
            nodes,
            rules,
            scale: 1.0,
            steps: FdSteps::default(),
            mode: DerivativeMode::FiniteDifference,
        };
        for (x, _) in chart.grid() {
            let g = chart.metric::<f64>(0, &x);
            let m = nalgebra::DMatrix::from_row_slice(n, n, &g);
            if nalgebra::linalg::Cholesky::new(m).is_none() {
                return Err(Error::DegenerateMetric { point: x });
            }
        }
        Ok(chart)
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// Tensor-product grid (coordinates, coordinate weight).
    pub(crate) fn grid(&self) -> Vec<(Vec<f64>, f64)> {
        let n = self.domain.len();
        let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .map(|a| {
                let (lo, hi) = self.domain[a];
                match self.rules[a] {
                    AxisRule::GaussLegendre => crate::quadrature::gauss_legendre_on(self.nodes[a], lo, hi),
                    AxisRule::Trapezoid => crate::quadrature::periodic_on(self.nodes[a], lo, hi),
                }
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let x: Vec<f64> = (0..n).map(|a| axes[a].0[idx[a]]).collect();
            let w: f64 = (0..n).map(|a| axes[a].1[idx[a]]).product();
            out.push((x, w));
            // odometer with per-axis radix
            let mut a = n;
            loop {
                if a == 0 {
                    return out;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < self.nodes[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    pub fn euler_characteristic(&self) -> Option<i64> {
        if self.periodic.iter().all(|&p| p) {
            Some(0)
        } else {
            None
        }
    }
}

impl ChartMetric for BoxChart {
    fn dim(&self) -> usize {
        self.domain.len()
    }

    fn metric<S: Scalar>(&self, _chart: usize, x: &[S]) -> Vec<S> {
        let n = self.domain.len();
        let mut g = vec![S::cst(0.0); n * n];
        for (i, j, terms) in &self.table.entries {
            let mut acc = S::cst(0.0);
            for term in terms {
                let mut v = S::cst(term.coeff);
                for f in &term.factors {
                    let (lo, hi) = self.domain[f.axis()];
                    let w = 2.0 * PI / (hi - lo);
                    v = v * match *f {
                        Factor::Pow { axis, exp } => x[axis].powi(exp),
                        Factor::Cos { axis, k } => (x[axis] - S::cst(lo)).scale(w * k as f64).cos(),
                        Factor::Sin { axis, k } => (x[axis] - S::cst(lo)).scale(w * k as f64).sin(),
                    };
                }
                acc = acc + v;
            }
            let acc = acc.scale(self.scale);
            g[i * n + j] = acc;
            g[j * n + i] = acc;
        }
        g
    }

    fn mode(&self) -> DerivativeMode {
        self.mode
    }

    fn steps(&self, _chart: usize, x: &[f64], field_step: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.domain.len();
        let mut inner = vec![0.0; n];
        let mut outer = vec![0.0; n];
        for a in 0..n {
            let (lo, hi) = self.domain[a];
            let len = hi - lo;
            let (mut hi_step, mut ho_step) = (self.steps.metric * len, field_step * len);
            if !self.periodic[a] {
                let room = (x[a] - lo).min(hi - x[a]);
                let need = 2.0 * (hi_step + ho_step);
                if room < need {
                    let f = room.max(0.0) / need;
                    hi_step *= f;
                    ho_step *= f;
                    if hi_step < MIN_RELATIVE_STEP * len {
                        return Err(Error::FdStepUnderflow { axis: a, point: x.to_vec() });
                    }
                }
            }
            inner[a] = hi_step;
            outer[a] = ho_step;
        }
        Ok((inner, outer))
    }
}
