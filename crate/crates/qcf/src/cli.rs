//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qcf_core::functional::gauss_bonnet_4d;
use qcf_core::optimize::{critical_search, BergerFamily, MetricFamily, ProductFamily, SearchOptions, SearchStatus};
use qcf_core::rigidity::{
    check_condition, check_integral_corollaries, round_sphere_yamabe, yamabe_lower_bound_4d, Condition, PinchingOptions,
};
use qcf_core::{Error, Manifold};
use serde_json::{json, Value};

use crate::format::{envelope, num, opt, render};
use crate::ledger;
use crate::report;
use crate::source::{self, SourceError};
use crate::suites::{self, Suite, SuiteOptions};

pub const EXIT_OK: i32 = 0;
/// Valid run whose hypothesis, tolerance or convergence test failed.
pub const EXIT_NOT_SATISFIED: i32 = 2;
pub const EXIT_INVALID_INPUT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Residual sup below which `check` reports the metric as critical; the
/// pinching theorems assume criticality.
pub const CRITICAL_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "qcf", version, about = "Quadratic curvature functionals: curvature analysis, pinching checks and critical-metric search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Seed for randomized suites (echoed in every report).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Preset such as `round_sphere(4,1)` or `berger_sphere(2,1,1)`.
    #[arg(long, value_name = "PRESET")]
    pub manifold: Option<String>,
    /// Chart-spec JSON file.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    /// Quadrature nodes per axis for chart manifolds.
    #[arg(long, value_name = "N")]
    pub resolution: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature ranges, F_t values and Euler–Lagrange residuals.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        /// Comma-separated t values (fractions such as -1/3 allowed).
        #[arg(long = "t", value_delimiter = ',', allow_negative_numbers = true, value_parser = parse_real, default_value = "-0.5")]
        t: Vec<f64>,
    },
    /// Evaluate pinching conditions.
    Check {
        #[command(flatten)]
        source: SourceArgs,
        /// Condition id, or `all` for every condition stated in the manifold's dimension.
        #[arg(long, default_value = "all")]
        theorem: String,
        #[arg(long = "t", value_delimiter = ',', allow_negative_numbers = true, value_parser = parse_real, default_value = "-0.5")]
        t: Vec<f64>,
        /// Euler characteristic (defaults to the preset's).
        #[arg(long, allow_negative_numbers = true)]
        chi: Option<i64>,
        /// Yamabe value: `exact`, `lower4d` or a number. Defaults to the exact
        /// value when known, else the unclamped 4D lower bound.
        #[arg(long)]
        yamabe: Option<String>,
    },
    /// Run a property suite: algebra, identities, constants, gauss-bonnet, oracles or all.
    Verify {
        suite: String,
        /// Random draws per dimension for the algebra suite.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Also write the oracle ledger (JSON lines) here.
        #[arg(long, value_name = "FILE")]
        ledger: Option<PathBuf>,
    },
    /// Critical-metric search over a metric family.
    Optimize {
        /// `berger-axial`, `berger` or `product(p,q)`.
        #[arg(long)]
        family: String,
        #[arg(long = "t", allow_negative_numbers = true, value_parser = parse_real, default_value = "-0.5")]
        t: f64,
        /// Comma-separated starting parameters.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_parser = parse_real)]
        theta0: Vec<f64>,
        #[arg(long, default_value_t = SearchOptions::default().max_iterations)]
        max_iter: usize,
        #[arg(long, default_value_t = SearchOptions::default().gradient_tol)]
        gradient_tol: f64,
        /// Write the iteration trace as CSV.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Compare ∫(|W|² − 2|R̊|² + R²/6) with 32π²χ in dimension 4.
    GaussBonnet {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, allow_negative_numbers = true)]
        chi: Option<i64>,
        /// Relative tolerance (absolute 1e-8 when χ = 0).
        #[arg(long, default_value_t = suites::GB_REL_TOL)]
        tol: f64,
    },
}

/// Real number or fraction `a/b`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("bad number {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite(_) | Error::FdStepUnderflow { .. } => EXIT_NUMERICAL,
            _ => EXIT_INVALID_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<SourceError> for Failure {
    fn from(e: SourceError) -> Self {
        match e {
            SourceError::Core(c) => c.into(),
            other => Failure::invalid(other.to_string()),
        }
    }
}

fn load(source: &SourceArgs) -> Result<Manifold, Failure> {
    let m = source::load(source.manifold.as_deref(), source.spec.as_deref())?;
    match source.resolution {
        Some(r) if !m.is_homogeneous() => Ok(m.with_resolution(r)?),
        _ => Ok(m),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_INVALID_INPUT
                }
            };
        }
    };
    match execute(&cli, stderr) {
        Ok((code, report)) => match emit(cli.out.as_deref(), &report, stdout) {
            Ok(()) => code,
            Err(f) => {
                let _ = writeln!(stderr, "error: {}", f.message);
                f.code
            }
        },
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(out: Option<&Path>, report: &Value, stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = render(report);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::invalid(format!("cannot write report: {e}"))),
    }
}

fn execute(cli: &Cli, stderr: &mut dyn Write) -> Result<(i32, Value), Failure> {
    match &cli.command {
        Command::Analyze { source, t } => {
            let m = load(source)?;
            let body = report::analyze(&m, t)?;
            Ok((EXIT_OK, envelope("analyze", json!({"seed": cli.seed, "analysis": body}))))
        }
        Command::Check { source, theorem, t, chi, yamabe } => check(cli, source, theorem, t, *chi, yamabe.as_deref()),
        Command::Verify { suite, samples, ledger: ledger_path } => verify(cli, suite, *samples, ledger_path.as_deref(), stderr),
        Command::Optimize { family, t, theta0, max_iter, gradient_tol, trace } => {
            optimize(cli, family, *t, theta0, *max_iter, *gradient_tol, trace.as_deref())
        }
        Command::GaussBonnet { source, chi, tol } => {
            let m = load(source)?;
            let chi = chi
                .or_else(|| m.euler_characteristic())
                .ok_or_else(|| Failure::invalid("this manifold has no known Euler characteristic; pass --chi"))?;
            let gb = gauss_bonnet_4d(&m, chi)?;
            let tol = if chi == 0 { suites::GB_ABS_TOL } else { *tol };
            let within = gb.relative_error() <= tol;
            let body = report::gauss_bonnet_json(&m, chi, &gb, tol, within);
            let code = if within { EXIT_OK } else { EXIT_NOT_SATISFIED };
            Ok((code, envelope("gauss-bonnet", json!({"seed": cli.seed, "gauss_bonnet": body}))))
        }
    }
}

/// Where the Yamabe value of a check comes from.
#[derive(Clone, Debug, PartialEq)]
enum YamabeSource {
    Auto,
    Exact,
    Lower4d,
    Value(f64),
}

fn yamabe_source(s: Option<&str>) -> Result<YamabeSource, Failure> {
    match s {
        None => Ok(YamabeSource::Auto),
        Some("exact") => Ok(YamabeSource::Exact),
        Some("lower4d") => Ok(YamabeSource::Lower4d),
        Some(v) => parse_real(v).map(YamabeSource::Value).map_err(|e| Failure::invalid(format!("--yamabe: {e}"))),
    }
}

/// `(value, provenance)`; `None` makes Yamabe conditions indeterminate.
fn resolve_yamabe(m: &Manifold, src: &YamabeSource) -> Result<(Option<f64>, &'static str), Failure> {
    let lower = |m: &Manifold| -> Result<Option<f64>, Failure> {
        let (v, clamped) = yamabe_lower_bound_4d(m)?;
        Ok(if clamped { None } else { Some(v) })
    };
    match src {
        YamabeSource::Value(v) => Ok((Some(*v), "caller")),
        YamabeSource::Exact => match m.round_sphere_dim() {
            Some(n) => Ok((Some(round_sphere_yamabe(n)), "exact")),
            None => Err(Failure::invalid("--yamabe exact needs a round sphere")),
        },
        YamabeSource::Lower4d => {
            if m.dim() != 4 {
                return Err(Failure::invalid("--yamabe lower4d needs a 4-manifold"));
            }
            Ok((lower(m)?, "lower4d"))
        }
        YamabeSource::Auto => {
            if let Some(n) = m.round_sphere_dim() {
                Ok((Some(round_sphere_yamabe(n)), "exact"))
            } else if m.dim() == 4 {
                Ok((lower(m)?, "lower4d"))
            } else {
                Ok((None, "none"))
            }
        }
    }
}

fn check(
    cli: &Cli,
    source: &SourceArgs,
    theorem: &str,
    ts: &[f64],
    chi: Option<i64>,
    yamabe: Option<&str>,
) -> Result<(i32, Value), Failure> {
    let m = load(source)?;
    let n = m.dim();
    let conditions: Vec<Condition> = if theorem == "all" {
        Condition::ALL.iter().copied().filter(|c| c.applies_in(n)).collect()
    } else {
        let c = Condition::from_id(theorem).ok_or_else(|| {
            let ids: Vec<&str> = Condition::ALL.iter().map(|c| c.id()).collect();
            Failure::invalid(format!("unknown condition {theorem:?}; known: all, {}", ids.join(", ")))
        })?;
        if !c.applies_in(n) {
            return Err(Failure::invalid(format!("condition {} is not stated in dimension {n}", c.id())));
        }
        vec![c]
    };
    let (y, y_source) = resolve_yamabe(&m, &yamabe_source(yamabe)?)?;
    let chi = chi.or_else(|| m.euler_characteristic());
    let opts = PinchingOptions::default();
    let label = m.label();
    let mut verdicts = Vec::new();
    let mut all_satisfied = true;
    for &t in ts {
        for &c in &conditions {
            let v = check_condition(&m, c, t, y, chi, &opts)?;
            all_satisfied &= v.hypothesis_satisfied;
            let digest = ledger::digest(&format!("{label}|{}|{:e}|{:?}|{:?}", c.id(), t, y, chi));
            verdicts.push(report::verdict_json(&v, &digest));
        }
    }
    let mut criticality = Vec::new();
    for &t in ts {
        let r = qcf_core::functional::el_residual(&m, t)?;
        criticality.push(json!({
            "t": num(t),
            "el_residual_sup": num(r.tensor_sup),
            "trace_residual_sup": num(r.trace_sup),
            "critical": r.tensor_sup <= CRITICAL_TOL && r.trace_sup <= CRITICAL_TOL,
        }));
    }
    let mut equivalences = Vec::new();
    if n == 4 && chi.is_some() {
        for &t in ts {
            let ic = check_integral_corollaries(&m, t, chi)?;
            equivalences.push(json!({
                "t": num(t),
                "curvature_integral_vs_euler": opt(ic.euler_equivalence),
                "curvature_integral_t_vs_euler_t": opt(ic.euler_equivalence_t),
            }));
        }
    }
    let body = json!({
        "seed": cli.seed,
        "manifold": label,
        "dim": n,
        "chi": chi,
        "yamabe": opt(y),
        "yamabe_source": y_source,
        "equality_tol": num(opts.equality_tol),
        "verdicts": verdicts,
        "criticality": criticality,
        "euler_equivalence": equivalences,
    });
    let code = if all_satisfied { EXIT_OK } else { EXIT_NOT_SATISFIED };
    Ok((code, envelope("check", body)))
}

fn verify(cli: &Cli, suite: &str, samples: usize, ledger_path: Option<&Path>, stderr: &mut dyn Write) -> Result<(i32, Value), Failure> {
    let selected: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![Suite::from_tag(suite).ok_or_else(|| {
            Failure::invalid(format!("unknown suite {suite:?}; known: algebra, identities, constants, gauss-bonnet, oracles, all"))
        })?]
    };
    let opts = SuiteOptions { samples, seed: cli.seed };
    let mut reports = Vec::new();
    let mut passed = true;
    for s in selected {
        let r = suites::run(s, &opts)?;
        for c in &r.checks {
            let _ = writeln!(stderr, "{c}");
        }
        passed &= r.passed();
        reports.push(r.to_json());
    }
    if let Some(path) = ledger_path {
        let records = qcf_core::oracle::derived_values()?;
        std::fs::write(path, ledger::render(&records))
            .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    let body = json!({"seed": cli.seed, "samples": samples, "suites": reports, "passed": passed});
    Ok((if passed { EXIT_OK } else { EXIT_NOT_SATISFIED }, envelope("verify", body)))
}

/// Family from its tag plus the default starting point.
pub fn family(tag: &str) -> Result<(Box<dyn MetricFamily>, Vec<f64>), Failure> {
    let tag = tag.trim();
    match tag {
        "berger-axial" => Ok((Box::new(BergerFamily { axial: true }), vec![1.5, 1.0])),
        "berger" => Ok((Box::new(BergerFamily { axial: false }), vec![1.5, 1.0, 1.0])),
        _ => {
            let p = source::Preset::parse(tag)?;
            if (p.tag == "product" || p.tag == "product_spheres") && p.args.len() == 2 {
                let dims: Vec<usize> = p
                    .args
                    .iter()
                    .map(|&a| if a.fract() == 0.0 && (2.0..=16.0).contains(&a) { Ok(a as usize) } else { Err(a) })
                    .collect::<Result<_, _>>()
                    .map_err(|a| Failure::invalid(format!("sphere dimension {a} out of range")))?;
                Ok((Box::new(ProductFamily { p: dims[0], q: dims[1] }), vec![1.0, 1.3]))
            } else {
                Err(Failure::invalid(format!("unknown family {tag:?}; known: berger-axial, berger, product(p,q)")))
            }
        }
    }
}

fn optimize(
    cli: &Cli,
    family_tag: &str,
    t: f64,
    theta0: &[f64],
    max_iter: usize,
    gradient_tol: f64,
    trace_path: Option<&Path>,
) -> Result<(i32, Value), Failure> {
    let (fam, default_start) = family(family_tag)?;
    let start = if theta0.is_empty() { default_start } else { theta0.to_vec() };
    let opts = SearchOptions { max_iterations: max_iter, gradient_tol, ..SearchOptions::default() };
    let res = critical_search(fam.as_ref(), t, &start, &opts)?;
    if let Some(path) = trace_path {
        let file = std::fs::File::create(path).map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))?;
        report::write_trace_csv(file, &res.trace).map_err(|e| Failure::invalid(format!("cannot write trace: {e}")))?;
    }
    let body = json!({
        "seed": cli.seed,
        "theta0": crate::format::nums(&start),
        "options": {
            "max_iterations": opts.max_iterations,
            "gradient_tol": num(opts.gradient_tol),
            "gradient_step": num(opts.gradient_step),
            "armijo": num(opts.armijo),
            "initial_step": num(opts.initial_step),
            "max_backtracks": opts.max_backtracks,
        },
        "search": report::search_json(&res),
    });
    let code = if res.status == SearchStatus::Converged { EXIT_OK } else { EXIT_NOT_SATISFIED };
    Ok((code, envelope("optimize", body)))
}
