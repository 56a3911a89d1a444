//! TOML problem files for `superint integrate`.

use std::collections::BTreeMap;

use serde::Deserialize;
use superint::berezin::naive_integral;
use superint::contour::{path_integral, Path};
use superint::quadrature::{IntegrationMode, QuadratureSpec};
use superint::supersmooth::{BodyBox, SuperDomain, SuperMap, SupersmoothFn};
use superint::vvintegral::{cvf_residual, vv_integral, FoliatedManifold, ParameterSet};
use superint::{Grassmann, IndexSet, Scalar, SuperPoly};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Integral over a foliated manifold.
    Vv,
    /// `∫ dq u_{1̄}(q)` over the domain box.
    Naive,
    /// `∫_γ dx u(x)` along a path in the even part.
    Contour,
    /// Change-of-variables residual for `[map]`.
    Cvf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Exact,
    Quadrature,
}

/// A scalar written as a TOML integer, float or string (`"1/3"`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    fn text(&self) -> String {
        match self {
            Number::Int(v) => v.to_string(),
            Number::Float(v) => v.to_string(),
            Number::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    /// Exponent of each even variable; empty for a constant.
    #[serde(default)]
    pub exp: Vec<u32>,
    /// Grassmann coefficient in canonical text, e.g. `"1 - 2*s[1,2]"`.
    pub coeff: Number,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    /// Odd multi-index `a` of `θ^a`, ascending, 1-based.
    #[serde(default)]
    pub odd: Vec<u32>,
    pub poly: Vec<Monomial>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDef {
    pub terms: Vec<Term>,
}

/// Components of a map, each naming an entry of `[functions]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDef {
    pub even: Vec<String>,
    #[serde(default)]
    pub odd: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldDef {
    /// `γ`; the identity when absent.
    pub gamma: Option<MapDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub phi: MapDef,
    pub phi_inverse: MapDef,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSection {
    pub u: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDef {
    pub lo: Vec<Number>,
    pub hi: Vec<Number>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathDef {
    /// Parameter interval `[a, b]`.
    #[serde(default = "unit_interval")]
    pub interval: [Number; 2],
    /// `γ(t) = Σ_k c_k t^k`, each `c_k` an even Grassmann element.
    pub coeffs: Vec<Number>,
}

fn unit_interval() -> [Number; 2] {
    [Number::Int(0), Number::Int(1)]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// Number of coefficient generators `s[1]..s[L]`.
    pub level: u32,
    #[serde(default)]
    pub seed: u64,
    pub mode: Mode,
    #[serde(default)]
    pub method: Method,
    /// `(m, n)` of the integrand.
    pub dims: [usize; 2],
    /// Optional expected value; a mismatch is a residual failure.
    pub expect: Option<Number>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionDef>,
    pub manifold: Option<ManifoldDef>,
    pub map: Option<MapSection>,
    pub function: FunctionSection,
    pub domain: Option<DomainDef>,
    pub path: Option<PathDef>,
    #[serde(default)]
    pub quad: QuadratureSpec,
}

/// Outcome of a problem: a value, or a residual between two sides.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<S: Scalar> {
    Value(Grassmann<S>),
    Cvf {
        lhs: Grassmann<S>,
        rhs: Grassmann<S>,
        residual: Grassmann<S>,
    },
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

/// Largest generator index written anywhere in `text`.
fn max_generator(text: &str) -> u32 {
    let mut best = 0;
    for chunk in text.split("s[").skip(1) {
        let inner = chunk.split(']').next().unwrap_or("");
        for idx in inner.split(',') {
            if let Ok(v) = idx.trim().parse::<u32>() {
                best = best.max(v);
            }
        }
    }
    best
}

impl ProblemSpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let spec: ProblemSpec = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    fn coefficient_texts(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .functions
            .values()
            .flat_map(|f| {
                f.terms
                    .iter()
                    .flat_map(|t| t.poly.iter().map(|m| m.coeff.text()))
            })
            .collect();
        if let Some(p) = &self.path {
            out.extend(p.coeffs.iter().map(Number::text));
        }
        if let Some(e) = &self.expect {
            out.push(e.text());
        }
        out
    }

    /// Minimal level that holds every generator mentioned in the file.
    pub fn minimal_level(&self) -> u32 {
        self.coefficient_texts()
            .iter()
            .map(|t| max_generator(t))
            .max()
            .unwrap_or(0)
    }

    fn validate(&self) -> Result<(), CliError> {
        let need = self.minimal_level();
        if need > self.level {
            return Err(parse_err(format!(
                "level {} is too small for this problem; it needs at least {need}",
                self.level
            )));
        }
        let [m, n] = self.dims;
        let check_ref = |name: &String| {
            if self.functions.contains_key(name) {
                Ok(())
            } else {
                Err(parse_err(format!("unknown function '{name}'")))
            }
        };
        check_ref(&self.function.u)?;
        let check_map = |what: &str, def: &MapDef| -> Result<(), CliError> {
            if def.even.len() != m || def.odd.len() != n {
                return Err(parse_err(format!(
                    "{what} has {}|{} components, expected {m}|{n}",
                    def.even.len(),
                    def.odd.len()
                )));
            }
            def.even.iter().chain(&def.odd).try_for_each(check_ref)
        };
        if let Some(g) = self.manifold.as_ref().and_then(|mf| mf.gamma.as_ref()) {
            check_map("manifold.gamma", g)?;
        }
        if let Some(map) = &self.map {
            check_map("map.phi", &map.phi)?;
            check_map("map.phi_inverse", &map.phi_inverse)?;
        }
        match self.mode {
            Mode::Contour => {
                if self.dims != [1, 0] {
                    return Err(parse_err("contour mode needs dims = [1, 0]"));
                }
                if self.path.is_none() {
                    return Err(parse_err("contour mode needs a [path] section"));
                }
            }
            Mode::Cvf if self.map.is_none() => {
                return Err(parse_err("cvf mode needs a [map] section"))
            }
            _ => {}
        }
        if self.mode != Mode::Contour {
            let d = self
                .domain
                .as_ref()
                .ok_or_else(|| parse_err("missing [domain] section"))?;
            if d.lo.len() != m || d.hi.len() != m {
                return Err(parse_err(format!(
                    "domain must have {m} lower and upper bounds"
                )));
            }
        }
        for (name, f) in &self.functions {
            for t in &f.terms {
                if t.odd.windows(2).any(|w| w[0] >= w[1])
                    || t.odd.iter().any(|&k| k == 0 || k as usize > n)
                {
                    return Err(parse_err(format!(
                        "function '{name}': odd index {:?} must ascend within 1..={n}",
                        t.odd
                    )));
                }
                if let Some(mono) = t
                    .poly
                    .iter()
                    .find(|mo| !mo.exp.is_empty() && mo.exp.len() != m)
                {
                    return Err(parse_err(format!(
                        "function '{name}': exponent {:?} needs {m} entries",
                        mono.exp
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn integration_mode(&self) -> IntegrationMode {
        match self.method {
            Method::Exact => IntegrationMode::Exact,
            Method::Quadrature => IntegrationMode::Quadrature(self.quad),
        }
    }

    fn scalar<S: Scalar>(&self, v: &Number) -> Result<S, CliError> {
        S::parse_scalar(&v.text()).ok_or_else(|| parse_err(format!("bad number {:?}", v.text())))
    }

    pub fn grassmann<S: Scalar>(&self, v: &Number) -> Result<Grassmann<S>, CliError> {
        Grassmann::parse(&v.text(), self.level).map_err(|e| parse_err(e.to_string()))
    }

    fn function<S: Scalar>(&self, name: &str) -> Result<SupersmoothFn<S>, CliError> {
        let [m, n] = self.dims;
        let def = &self.functions[name];
        let mut polys = Vec::new();
        for t in &def.terms {
            let a = IndexSet::from_indices(&t.odd).map_err(|e| parse_err(e.to_string()))?;
            let mut p = SuperPoly::zero(m, self.level);
            for mono in &t.poly {
                let exp = if mono.exp.is_empty() {
                    vec![0; m]
                } else {
                    mono.exp.clone()
                };
                p.add_term(exp, self.grassmann(&mono.coeff)?);
            }
            polys.push((a, p));
        }
        SupersmoothFn::from_polys(m, n, self.level, polys)
            .map_err(|e| parse_err(format!("function '{name}': {e}")))
    }

    fn map<S: Scalar>(&self, def: &MapDef) -> Result<SuperMap<S>, CliError> {
        let [m, n] = self.dims;
        let even = def
            .even
            .iter()
            .map(|k| self.function(k))
            .collect::<Result<Vec<_>, _>>()?;
        let odd = def
            .odd
            .iter()
            .map(|k| self.function(k))
            .collect::<Result<Vec<_>, _>>()?;
        SuperMap::new(m, n, even, odd).map_err(|e| parse_err(e.to_string()))
    }

    fn body<S: Scalar>(&self) -> Result<BodyBox<S>, CliError> {
        let d = self
            .domain
            .as_ref()
            .ok_or_else(|| parse_err("missing [domain] section"))?;
        let lo =
            d.lo.iter()
                .map(|v| self.scalar(v))
                .collect::<Result<Vec<S>, _>>()?;
        let hi =
            d.hi.iter()
                .map(|v| self.scalar(v))
                .collect::<Result<Vec<S>, _>>()?;
        BodyBox::new(lo, hi).map_err(|e| parse_err(e.to_string()))
    }

    fn manifold<S: Scalar>(&self) -> Result<FoliatedManifold<S>, CliError> {
        let params = ParameterSet::new(self.body()?, self.dims[1]);
        match self.manifold.as_ref().and_then(|mf| mf.gamma.as_ref()) {
            Some(g) => {
                FoliatedManifold::new(params, self.map(g)?).map_err(|e| parse_err(e.to_string()))
            }
            None => Ok(FoliatedManifold::flat(params, self.level)),
        }
    }

    fn path<S: Scalar>(&self) -> Result<Path<S>, CliError> {
        let p = self
            .path
            .as_ref()
            .ok_or_else(|| parse_err("missing [path] section"))?;
        let coeffs = p
            .coeffs
            .iter()
            .map(|c| self.grassmann(c))
            .collect::<Result<Vec<Grassmann<S>>, _>>()?;
        let poly = SuperPoly::univariate_grassmann(&coeffs, self.level);
        Path::polynomial(
            self.scalar(&p.interval[0])?,
            self.scalar(&p.interval[1])?,
            poly,
        )
        .map_err(|e| parse_err(e.to_string()))
    }

    /// Builds every object first (parse errors), then integrates (preconditions).
    pub fn evaluate<S: Scalar>(&self) -> Result<Outcome<S>, CliError> {
        let u = self.function::<S>(&self.function.u)?;
        let mode = self.integration_mode();
        match self.mode {
            Mode::Vv => {
                let mf = self.manifold()?;
                Ok(Outcome::Value(vv_integral(&mf, &u, &mode)?))
            }
            Mode::Naive => {
                let dom = SuperDomain::new(self.body()?, self.dims[1]);
                Ok(Outcome::Value(naive_integral(&u, &dom, &mode)?))
            }
            Mode::Contour => {
                let path = self.path()?;
                Ok(Outcome::Value(path_integral(&path, &u, &mode)?))
            }
            Mode::Cvf => {
                let sec = self
                    .map
                    .as_ref()
                    .ok_or_else(|| parse_err("cvf mode needs a [map] section"))?;
                let (phi, inv) = (self.map(&sec.phi)?, self.map(&sec.phi_inverse)?);
                let mf = self.manifold()?;
                let r = cvf_residual(&phi, &inv, &mf, &u, &mode)?;
                Ok(Outcome::Cvf {
                    lhs: r.lhs,
                    rhs: r.rhs,
                    residual: r.residual,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use superint::Q;

    const FLAT: &str = r#"
        level = 0
        mode = "vv"
        dims = [1, 2]
        [functions.u]
        terms = [{ odd = [1, 2], poly = [{ coeff = 1 }] }]
        [function]
        u = "u"
        [domain]
        lo = [0]
        hi = [1]
    "#;

    #[test]
    fn flat_foliation_collapses_to_naive() {
        let spec = ProblemSpec::from_toml(FLAT).unwrap();
        assert_eq!(
            spec.evaluate::<Q>().unwrap(),
            Outcome::Value(Grassmann::scalar(Q::from_integer(1.into()), 0))
        );
    }

    #[test]
    fn reports_minimal_level() {
        let text = FLAT.replace("coeff = 1", "coeff = \"1 + s[1,3]\"");
        let err = ProblemSpec::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("at least 3"), "{err}");
    }

    #[test]
    fn unresolved_reference_is_a_parse_error() {
        let err = ProblemSpec::from_toml(&FLAT.replace("u = \"u\"", "u = \"v\"")).unwrap_err();
        assert!(matches!(err, CliError::Parse(_)));
    }

    #[test]
    fn generator_scan() {
        assert_eq!(max_generator("1 - s[2] + 3*s[1,4]"), 4);
        assert_eq!(max_generator("5"), 0);
    }
}
