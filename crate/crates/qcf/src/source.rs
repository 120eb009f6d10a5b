//! Manifold sources: preset strings such as `round_sphere(4,1)` and chart-spec
//! JSON documents.

use std::fmt;
use std::path::Path;

use qcf_core::chart::{AxisRule, BoxChart, Factor, MetricTable, Term};
use qcf_core::{AmbientForm, Manifold};
use serde::Deserialize;

#[derive(Debug)]
pub enum SourceError {
    Io(String),
    Parse(String),
    Invalid(String),
    Core(qcf_core::Error),
}

impl fmt::Display for SourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceError::Io(m) => write!(f, "cannot read chart spec: {m}"),
            SourceError::Parse(m) => write!(f, "cannot parse: {m}"),
            SourceError::Invalid(m) => write!(f, "invalid manifold: {m}"),
            SourceError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SourceError {}

impl From<qcf_core::Error> for SourceError {
    fn from(e: qcf_core::Error) -> Self {
        SourceError::Core(e)
    }
}

/// A parsed preset call: tag plus numeric arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub tag: String,
    pub args: Vec<f64>,
}

impl Preset {
    pub fn parse(text: &str) -> Result<Self, SourceError> {
        let text = text.trim();
        let (tag, rest) = match text.find('(') {
            Some(i) => (&text[..i], &text[i..]),
            None => (text, "()"),
        };
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| SourceError::Parse(format!("expected tag(args...), got {text:?}")))?;
        let args = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| SourceError::Parse(format!("bad number {a:?} in {text:?}"))))
                .collect::<Result<Vec<_>, _>>()?
        };
        let tag = tag.trim();
        if tag.is_empty() || !tag.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(SourceError::Parse(format!("bad preset tag in {text:?}")));
        }
        Ok(Self { tag: tag.to_string(), args })
    }

    pub fn build(&self) -> Result<Manifold, SourceError> {
        let a = &self.args;
        let arity = |ok: bool, usage: &str| {
            if ok {
                Ok(())
            } else {
                Err(SourceError::Invalid(format!("usage: {usage}")))
            }
        };
        let m = match self.tag.as_str() {
            "round_sphere" => {
                arity(a.len() == 2, "round_sphere(n, r)")?;
                Manifold::round_sphere(dim_arg(a[0])?, a[1])?
            }
            "product_spheres" => {
                arity(a.len() == 4, "product_spheres(p, r1, q, r2)")?;
                Manifold::product_spheres(dim_arg(a[0])?, a[1], dim_arg(a[2])?, a[3])?
            }
            "flat_torus" => {
                arity(!a.is_empty(), "flat_torus(n[, L1, ..., Ln])")?;
                let n = dim_arg(a[0])?;
                let periods = if a.len() == 1 {
                    vec![1.0; n]
                } else {
                    arity(a.len() == n + 1, "flat_torus(n[, L1, ..., Ln])")?;
                    a[1..].to_vec()
                };
                Manifold::flat_torus(&periods)?
            }
            "berger_sphere" => {
                arity(a.len() == 3, "berger_sphere(l1, l2, l3)")?;
                Manifold::berger_sphere(a[0], a[1], a[2])?
            }
            "perturbed_sphere" => {
                arity(a.len() == 3, "perturbed_sphere(n, eps, mode)")?;
                Manifold::perturbed_sphere(dim_arg(a[0])?, a[1], dim_arg(a[2])? as u32)?
            }
            "sphere_chart" => {
                arity(a.len() == 1 || a.len() == 2, "sphere_chart(n[, r])")?;
                let radius = a.get(1).copied().unwrap_or(1.0);
                Manifold::sphere_chart(dim_arg(a[0])?, AmbientForm::Round { radius })?
            }
            "berger_chart" => {
                arity(a.len() == 3, "berger_chart(l1, l2, l3)")?;
                Manifold::sphere_chart(3, AmbientForm::Berger { lambda: [a[0], a[1], a[2]] })?
            }
            other => return Err(SourceError::Invalid(format!("unknown preset {other:?}"))),
        };
        Ok(m)
    }
}

fn dim_arg(x: f64) -> Result<usize, SourceError> {
    if x.fract() == 0.0 && x >= 0.0 && x <= 64.0 {
        Ok(x as usize)
    } else {
        Err(SourceError::Invalid(format!("expected a small non-negative integer, got {x}")))
    }
}

/// Chart-spec document.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub dim: Option<usize>,
    #[serde(default)]
    pub domain: Vec<[f64; 2]>,
    #[serde(default)]
    pub periodic: Vec<bool>,
    pub metric: MetricSpec,
    pub quadrature: Option<QuadratureSpec>,
}

/// Either a preset string or `{"entries": [...]}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(try_from = "serde_json::Value")]
pub enum MetricSpec {
    Preset(String),
    Table { entries: Vec<EntrySpec> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableSpec {
    entries: Vec<EntrySpec>,
}

impl TryFrom<serde_json::Value> for MetricSpec {
    type Error = String;

    fn try_from(v: serde_json::Value) -> Result<Self, String> {
        match v {
            serde_json::Value::String(s) => Ok(MetricSpec::Preset(s)),
            v @ serde_json::Value::Object(_) => {
                let t: TableSpec = serde_json::from_value(v).map_err(|e| format!("metric table: {e}"))?;
                Ok(MetricSpec::Table { entries: t.entries })
            }
            _ => Err("metric must be a preset string or an object with \"entries\"".into()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: f64,
    #[serde(default)]
    pub factors: Vec<FactorSpec>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(try_from = "RawFactor")]
pub enum FactorSpec {
    Pow { axis: usize, exp: u32 },
    Cos { axis: usize, k: u32 },
    Sin { axis: usize, k: u32 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFactor {
    kind: String,
    axis: usize,
    exp: Option<u32>,
    k: Option<u32>,
}

impl TryFrom<RawFactor> for FactorSpec {
    type Error = String;

    fn try_from(r: RawFactor) -> Result<Self, String> {
        let axis = r.axis;
        match (r.kind.as_str(), r.exp, r.k) {
            ("pow", Some(exp), None) => Ok(FactorSpec::Pow { axis, exp }),
            ("cos", None, Some(k)) => Ok(FactorSpec::Cos { axis, k }),
            ("sin", None, Some(k)) => Ok(FactorSpec::Sin { axis, k }),
            ("pow", ..) => Err("pow factor needs \"exp\" only".into()),
            ("cos" | "sin", ..) => Err(format!("{} factor needs \"k\" only", r.kind)),
            (other, ..) => Err(format!("unknown factor kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default)]
    pub nodes: Vec<usize>,
    pub rule: Option<RuleSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RuleSpec {
    All(String),
    PerAxis(Vec<String>),
}

fn axis_rule(tag: &str) -> Result<Option<AxisRule>, SourceError> {
    match tag {
        "gauss-legendre" | "gauss_legendre" => Ok(Some(AxisRule::GaussLegendre)),
        "trapezoid" => Ok(Some(AxisRule::Trapezoid)),
        "auto" => Ok(None),
        other => Err(SourceError::Invalid(format!("unknown quadrature rule {other:?}"))),
    }
}

impl ChartSpec {
    pub fn from_json(text: &str) -> Result<Self, SourceError> {
        serde_json::from_str(text).map_err(|e| SourceError::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, SourceError> {
        let text = std::fs::read_to_string(path).map_err(|e| SourceError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn build(&self) -> Result<Manifold, SourceError> {
        match &self.metric {
            MetricSpec::Preset(p) => {
                let m = Preset::parse(p)?.build()?;
                if let Some(d) = self.dim {
                    if d != m.dim() {
                        return Err(SourceError::Invalid(format!("dim {d} does not match preset dimension {}", m.dim())));
                    }
                }
                match self.quadrature.as_ref().and_then(|q| q.nodes.first()) {
                    Some(&k) if !m.is_homogeneous() => Ok(m.with_resolution(k)?),
                    _ => Ok(m),
                }
            }
            MetricSpec::Table { entries } => self.build_table(entries),
        }
    }

    fn build_table(&self, entries: &[EntrySpec]) -> Result<Manifold, SourceError> {
        let n = self.dim.ok_or_else(|| SourceError::Invalid("coefficient-table charts need dim".into()))?;
        if self.domain.len() != n {
            return Err(SourceError::Invalid(format!("domain has {} intervals for dim {n}", self.domain.len())));
        }
        let periodic = if self.periodic.is_empty() { vec![false; n] } else { self.periodic.clone() };
        let q = self.quadrature.clone().unwrap_or(QuadratureSpec { nodes: Vec::new(), rule: None });
        let nodes = match q.nodes.len() {
            0 => vec![16; n],
            1 => vec![q.nodes[0]; n],
            _ => q.nodes.clone(),
        };
        let rules = match &q.rule {
            None => None,
            Some(RuleSpec::All(tag)) => axis_rule(tag)?.map(|r| vec![r; n]),
            Some(RuleSpec::PerAxis(tags)) => {
                let parsed = tags.iter().map(|t| axis_rule(t)).collect::<Result<Vec<_>, _>>()?;
                if parsed.iter().any(|r| r.is_none()) {
                    let defaults: Vec<AxisRule> =
                        periodic.iter().map(|&p| if p { AxisRule::Trapezoid } else { AxisRule::GaussLegendre }).collect();
                    Some(parsed.iter().zip(defaults).map(|(r, d)| r.unwrap_or(d)).collect())
                } else {
                    Some(parsed.into_iter().flatten().collect())
                }
            }
        };
        let mut table = MetricTable { dim: n, entries: Vec::new() };
        for e in entries {
            let (i, j) = if e.i <= e.j { (e.i, e.j) } else { (e.j, e.i) };
            let terms = e
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff,
                    factors: t
                        .factors
                        .iter()
                        .map(|f| match *f {
                            FactorSpec::Pow { axis, exp } => Factor::Pow { axis, exp },
                            FactorSpec::Cos { axis, k } => Factor::Cos { axis, k },
                            FactorSpec::Sin { axis, k } => Factor::Sin { axis, k },
                        })
                        .collect(),
                })
                .collect();
            table.entries.push((i, j, terms));
        }
        let domain = self.domain.iter().map(|[lo, hi]| (*lo, *hi)).collect();
        Ok(Manifold::box_chart(BoxChart::new(domain, periodic, table, nodes, rules)?))
    }
}

/// Resolves exactly one of `--manifold` / `--spec`.
pub fn load(manifold: Option<&str>, spec: Option<&Path>) -> Result<Manifold, SourceError> {
    match (manifold, spec) {
        (Some(p), None) => Preset::parse(p)?.build(),
        (None, Some(path)) => ChartSpec::read(path)?.build(),
        (Some(_), Some(_)) => Err(SourceError::Invalid("give either --manifold or --spec, not both".into())),
        (None, None) => Err(SourceError::Invalid("a manifold is required (--manifold or --spec)".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_syntax() {
        let p = Preset::parse(" product_spheres(2, 1, 2, 1.5) ").unwrap();
        assert_eq!(p.tag, "product_spheres");
        assert_eq!(p.args, vec![2.0, 1.0, 2.0, 1.5]);
        assert!(Preset::parse("round_sphere(4,").is_err());
        assert!(Preset::parse("round_sphere(a,1)").is_err());
    }

    #[test]
    fn preset_arity_is_checked() {
        assert!(Preset::parse("round_sphere(4)").unwrap().build().is_err());
        assert!(Preset::parse("flat_torus(3, 1, 2)").unwrap().build().is_err());
        assert_eq!(Preset::parse("flat_torus(3)").unwrap().build().unwrap().dim(), 3);
    }

    #[test]
    fn table_spec_builds() {
        let doc = r#"{
            "dim": 2,
            "domain": [[0, 1], [0, 1]],
            "periodic": [true, true],
            "metric": {"entries": [
                {"i": 0, "j": 0, "terms": [{"coeff": 1.0}]},
                {"i": 1, "j": 1, "terms": [{"coeff": 1.0}, {"coeff": 0.1, "factors": [{"kind": "cos", "axis": 0, "k": 1}]}]}
            ]},
            "quadrature": {"nodes": [8, 8], "rule": "trapezoid"}
        }"#;
        let m = ChartSpec::from_json(doc).unwrap().build().unwrap();
        assert_eq!(m.dim(), 2);
        assert!((m.volume().unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn preset_spec_builds() {
        let m = ChartSpec::from_json(r#"{"metric": "round_sphere(3, 1)"}"#).unwrap().build().unwrap();
        assert_eq!(m.dim(), 3);
    }
}
