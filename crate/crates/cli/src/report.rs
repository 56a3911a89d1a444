//! JSON rendering of Grassmann values and command reports.

use serde::Serialize;
use serde_json::Value;
use superint::{Grassmann, Scalar};

/// A Grassmann element as canonical text plus `(index-set, coefficient)` pairs.
/// Exact coefficients are strings such as `"-3/2"`; floating ones are numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Element {
    pub text: String,
    pub terms: Vec<(Vec<u32>, Value)>,
}

impl Element {
    pub fn new<S: Scalar>(g: &Grassmann<S>) -> Self {
        let terms = g
            .to_pairs()
            .into_iter()
            .map(|(k, c)| {
                let v = if S::EXACT {
                    Value::String(c.to_string())
                } else {
                    serde_json::json!(c.to_f64())
                };
                (k, v)
            })
            .collect();
        Element {
            text: g.to_string(),
            terms,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrateReport {
    pub mode: String,
    pub method: String,
    pub level: u32,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Element>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Element>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Element>,
    /// `lhs − rhs` in cvf mode, `value − expect` when an expectation is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Element>,
    /// `None` when the residual must vanish exactly.
    pub tolerance: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Example1Json {
    pub omega: (String, String),
    pub naive_lhs: Element,
    pub naive_rhs: Element,
    pub discrepancy: Element,
    pub boundary_term: Element,
    pub vv_lhs: Element,
    pub vv_rhs: Element,
    pub vv_residual: Element,
    pub sdet_phi: String,
    pub passed: bool,
}

/// Pretty JSON with a trailing newline.
pub fn render<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
