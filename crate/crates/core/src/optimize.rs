//! Critical-metric searches over finite-dimensional metric families.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::functional::{evaluate_functional, functional_value, FunctionalReport};
use crate::manifold::Manifold;

/// A finite-dimensional family `θ ↦ g(θ)` containing all constant multiples
/// of its members.
pub trait MetricFamily {
    fn name(&self) -> String;
    fn param_count(&self) -> usize;
    /// Feasible box, one `(lo, hi)` per parameter.
    fn bounds(&self) -> Vec<(f64, f64)>;
    fn manifold(&self, theta: &[f64]) -> Result<Manifold>;
    /// Parameters of `c·g(θ)`.
    fn rescale(&self, theta: &[f64], c: f64) -> Vec<f64>;
}

/// Berger metrics `(λ₁, λ₂, λ₃)` on `S³`. With `axial` the parameters are
/// `(λ, μ)` for the metric `(λ, μ, μ)`, whose shape is `(λ/μ, 1, 1)`.
#[derive(Clone, Debug)]
pub struct BergerFamily {
    pub axial: bool,
}

impl MetricFamily for BergerFamily {
    fn name(&self) -> String {
        if self.axial {
            "berger_axial".into()
        } else {
            "berger".into()
        }
    }

    fn param_count(&self) -> usize {
        if self.axial {
            2
        } else {
            3
        }
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(1e-3, 1e3); self.param_count()]
    }

    fn manifold(&self, theta: &[f64]) -> Result<Manifold> {
        check_len(self, theta)?;
        if self.axial {
            Manifold::berger_sphere(theta[0], theta[1], theta[1])
        } else {
            Manifold::berger_sphere(theta[0], theta[1], theta[2])
        }
    }

    fn rescale(&self, theta: &[f64], c: f64) -> Vec<f64> {
        theta.iter().map(|v| v * c).collect()
    }
}

/// `S^p(r₁) × S^q(r₂)` with parameters `(r₁, r₂)`.
#[derive(Clone, Debug)]
pub struct ProductFamily {
    pub p: usize,
    pub q: usize,
}

impl MetricFamily for ProductFamily {
    fn name(&self) -> String {
        alloc::format!("product_spheres_{}_{}", self.p, self.q)
    }

    fn param_count(&self) -> usize {
        2
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(1e-3, 1e3); 2]
    }

    fn manifold(&self, theta: &[f64]) -> Result<Manifold> {
        check_len(self, theta)?;
        Manifold::product_spheres(self.p, theta[0], self.q, theta[1])
    }

    fn rescale(&self, theta: &[f64], c: f64) -> Vec<f64> {
        let s = libm::sqrt(c);
        theta.iter().map(|v| v * s).collect()
    }
}

fn check_len<F: MetricFamily + ?Sized>(fam: &F, theta: &[f64]) -> Result<()> {
    if theta.len() != fam.param_count() {
        return Err(Error::DimensionMismatch { expected: fam.param_count(), found: theta.len() });
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite family parameter"));
    }
    Ok(())
}

fn in_box(theta: &[f64], bounds: &[(f64, f64)]) -> bool {
    theta.iter().zip(bounds).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
}

/// Parameters of the unit-volume member of the ray through `θ`:
/// `c = Vol^(−2/n)`.
pub fn normalize_volume<F: MetricFamily + ?Sized>(fam: &F, theta: &[f64]) -> Result<Vec<f64>> {
    let m = fam.manifold(theta)?;
    let vol = m.volume()?;
    if !(vol > 0.0) || !vol.is_finite() {
        return Err(Error::NonFinite(alloc::format!("volume {vol}")));
    }
    let c = libm::pow(vol, -2.0 / m.dim() as f64);
    Ok(fam.rescale(theta, c))
}

/// `F_t` of the unit-volume normalization of `g(θ)`.
pub fn normalized_functional<F: MetricFamily + ?Sized>(fam: &F, theta: &[f64], t: f64) -> Result<f64> {
    let unit = normalize_volume(fam, theta)?;
    Ok(functional_value(&fam.manifold(&unit)?, t)?.value_ft)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the parameter-gradient norm.
    pub gradient_tol: f64,
    /// Relative central-difference step for parameter gradients.
    pub gradient_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub initial_step: f64,
    pub max_backtracks: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tol: 1e-8,
            gradient_step: 1e-3,
            armijo: 1e-4,
            initial_step: 1e-2,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStatus {
    Converged,
    MaxIterations,
    /// Every admissible step leaves the feasible box.
    Boundary,
    /// No step along the negative gradient decreases the objective.
    LineSearchStalled,
}

impl SearchStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchStatus::Converged => "converged",
            SearchStatus::MaxIterations => "max_iterations",
            SearchStatus::Boundary => "boundary",
            SearchStatus::LineSearchStalled => "line_search_stalled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub theta: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub status: SearchStatus,
    pub trace: Vec<TraceRow>,
}

/// Sixth-order central-difference gradient with relative steps `h·|x_i|`
/// (absolute `h` at zero).
pub fn fd_gradient(f: &mut impl FnMut(&[f64]) -> Result<f64>, x: &[f64], h: f64) -> Result<Vec<f64>> {
    const OFFSETS: [f64; 6] = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];
    const WEIGHTS: [f64; 6] = [-1.0, 9.0, -45.0, 45.0, -9.0, 1.0];
    let mut g = vec![0.0; x.len()];
    let mut y = x.to_vec();
    for i in 0..x.len() {
        let step = if x[i] == 0.0 { h } else { h * x[i].abs() };
        let mut acc = 0.0;
        for (o, w) in OFFSETS.iter().zip(WEIGHTS) {
            y[i] = x[i] + o * step;
            let v = f(&y);
            y[i] = x[i];
            acc += w * v?;
        }
        g[i] = acc / (60.0 * step);
    }
    Ok(g)
}

/// Removes the component of `g` along `v`.
fn reject(g: &mut [f64], v: &[f64]) {
    let vv: f64 = v.iter().map(|a| a * a).sum();
    if vv > 0.0 {
        let c = g.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / vv;
        for (a, b) in g.iter_mut().zip(v) {
            *a -= c * b;
        }
    }
}

/// Gradient of the scale-invariant objective along the unit-volume slice:
/// the finite-difference gradient with its component along the scaling
/// direction removed.
pub fn reduced_gradient<F: MetricFamily + ?Sized>(fam: &F, theta: &[f64], t: f64, h: f64) -> Result<Vec<f64>> {
    let mut scale_free = |th: &[f64]| normalized_functional(fam, th, t);
    let mut g = fd_gradient(&mut scale_free, theta, h)?;
    let eps = 1e-6;
    let up = fam.rescale(theta, 1.0 + eps);
    let down = fam.rescale(theta, 1.0 - eps);
    let v: Vec<f64> = up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
    reject(&mut g, &v);
    Ok(g)
}

fn noise_floor(value: f64) -> f64 {
    64.0 * f64::EPSILON * value.abs().max(1.0)
}

/// Consecutive iterations whose step had to be shortened to stay inside the
/// feasible box before the search reports [`SearchStatus::Boundary`].
pub const BOX_LIMITED_ITERATIONS: usize = 5;

/// Gradient descent with Armijo backtracking. `project` maps every accepted
/// iterate back onto the constraint set; trial points outside `bounds` shrink
/// the step and are never clamped, and a search that keeps pressing against
/// the box stops with a boundary status. Near a minimum, where value changes
/// drop below rounding level, a trial is accepted when it lowers the gradient
/// norm instead.
pub fn minimize(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    mut grad: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    mut project: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    bounds: &[(f64, f64)],
    opts: &SearchOptions,
) -> Result<Minimum> {
    if bounds.len() != x0.len() {
        return Err(Error::DimensionMismatch { expected: x0.len(), found: bounds.len() });
    }
    let mut x = project(x0)?;
    if !in_box(&x, bounds) {
        return Err(invalid("starting point outside the feasible box"));
    }
    let mut value = f(&x)?;
    let mut step = opts.initial_step;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut box_limited_run = 0;
    let status = loop {
        let g = grad(&x)?;
        let gn = libm::sqrt(g.iter().map(|v| v * v).sum::<f64>());
        if !gn.is_finite() {
            return Err(Error::NonFinite("parameter gradient".into()));
        }
        trace.push(TraceRow { iteration: iterations, theta: x.clone(), value, gradient_norm: gn, step });
        if gn < opts.gradient_tol {
            break SearchStatus::Converged;
        }
        if iterations >= opts.max_iterations {
            break SearchStatus::MaxIterations;
        }
        let mut alpha = step;
        let mut accepted = None;
        let mut blocked_by_box = false;
        let mut box_limited = false;
        for _ in 0..opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
            if !in_box(&trial, bounds) {
                blocked_by_box = true;
                box_limited = true;
                alpha *= 0.5;
                continue;
            }
            let trial = project(&trial)?;
            if !in_box(&trial, bounds) {
                blocked_by_box = true;
                box_limited = true;
                alpha *= 0.5;
                continue;
            }
            blocked_by_box = false;
            let v = f(&trial)?;
            let decrease = opts.armijo * alpha * gn * gn;
            let resolvable = decrease > noise_floor(value);
            if resolvable && v <= value - decrease {
                accepted = Some((trial, v));
                break;
            }
            // decreases below rounding level cannot be resolved by values alone
            if !resolvable || (v - value).abs() <= noise_floor(value) {
                let gt = grad(&trial)?;
                if libm::sqrt(gt.iter().map(|v| v * v).sum::<f64>()) < gn {
                    accepted = Some((trial, v));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((xn, v)) => {
                x = xn;
                value = v;
                step = 2.0 * alpha;
                iterations += 1;
                box_limited_run = if box_limited { box_limited_run + 1 } else { 0 };
                if box_limited_run >= BOX_LIMITED_ITERATIONS {
                    break SearchStatus::Boundary;
                }
            }
            None if blocked_by_box => break SearchStatus::Boundary,
            None => break SearchStatus::LineSearchStalled,
        }
    };
    let g = grad(&x)?;
    let gradient_norm = libm::sqrt(g.iter().map(|v| v * v).sum::<f64>());
    Ok(Minimum { x, value, gradient: g, gradient_norm, iterations, status, trace })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub family: String,
    pub t: f64,
    /// Unit-volume parameters at the end of the search.
    pub theta: Vec<f64>,
    pub volume: f64,
    pub status: SearchStatus,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub report: FunctionalReport,
    pub trace: Vec<TraceRow>,
}

/// Projected gradient descent on `θ ↦ F_t(normalize(g(θ)))`.
pub fn critical_search<F: MetricFamily + ?Sized>(
    fam: &F,
    t: f64,
    theta0: &[f64],
    opts: &SearchOptions,
) -> Result<SearchResult> {
    check_len(fam, theta0)?;
    if fam.param_count() > 8 {
        return Err(invalid("metric families are limited to 8 parameters"));
    }
    if !t.is_finite() {
        return Err(invalid("t must be finite"));
    }
    let bounds = fam.bounds();
    let objective = |th: &[f64]| -> Result<f64> { functional_value(&fam.manifold(th)?, t).map(|v| v.value_ft) };
    let min = minimize(
        objective,
        |th| reduced_gradient(fam, th, t, opts.gradient_step),
        |th| normalize_volume(fam, th),
        theta0,
        &bounds,
        opts,
    )?;
    let m = fam.manifold(&min.x)?;
    let volume = m.volume()?;
    let report = evaluate_functional(&m, t)?;
    Ok(SearchResult {
        family: fam.name(),
        t,
        theta: min.x,
        volume,
        status: min.status,
        iterations: min.iterations,
        gradient_norm: min.gradient_norm,
        report,
        trace: min.trace,
    })
}
