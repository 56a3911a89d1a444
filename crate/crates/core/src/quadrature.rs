//! Composite Gauss–Legendre tensor quadrature for Grassmann-valued integrands.

use serde::{Deserialize, Serialize};

use crate::algebra::Grassmann;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Panels per axis for the coarse pass; the check pass doubles this.
    pub panels: usize,
    /// Accepted difference between the two passes, relative to `max(1, |value|)`.
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 16,
            panels: 8,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegrationMode {
    Exact,
    Quadrature(QuadratureSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult<S: Scalar> {
    pub value: Grassmann<S>,
    /// Coefficient-wise max difference between the coarse and refined passes.
    pub estimate: f64,
    pub evaluations: usize,
}

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order.max(1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            out.push((0.0, 2.0));
            continue;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Nodes and weights of the composite rule on `[a, b]`.
fn axis_rule<S: Scalar>(a: &S, b: &S, order: usize, panels: usize) -> Vec<(S, S)> {
    let (a, b) = (a.to_f64(), b.to_f64());
    let h = (b - a) / panels as f64;
    let base = gauss_legendre(order);
    let mut out = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (x, w) in &base {
            out.push((
                S::from_f64(lo + 0.5 * h * (x + 1.0)),
                S::from_f64(0.5 * h * w),
            ));
        }
    }
    out
}

/// One pass of the tensor rule.
pub fn integrate_box_fixed<S, F>(
    bounds: &[(S, S)],
    order: usize,
    panels: usize,
    f: &mut F,
) -> Result<(Grassmann<S>, usize)>
where
    S: Scalar,
    F: FnMut(&[S]) -> Result<Grassmann<S>>,
{
    let rules: Vec<Vec<(S, S)>> = bounds
        .iter()
        .map(|(a, b)| axis_rule(a, b, order, panels))
        .collect();
    let mut acc: Option<Grassmann<S>> = None;
    let mut count = 0usize;
    let mut idx = vec![0usize; rules.len()];
    let mut point: Vec<S> = rules.iter().map(|r| r[0].0.clone()).collect();
    loop {
        let mut w = S::one();
        for (j, r) in rules.iter().enumerate() {
            point[j] = r[idx[j]].0.clone();
            w = w * r[idx[j]].1.clone();
        }
        let v = f(&point)?.scale(&w);
        count += 1;
        acc = Some(match acc {
            None => v,
            Some(a) => {
                let level = a.level().max(v.level());
                &a.lift(level) + &v.lift(level)
            }
        });
        let mut j = 0;
        loop {
            if j == rules.len() {
                return Ok((acc.expect("at least one node"), count));
            }
            idx[j] += 1;
            if idx[j] < rules[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn max_diff<S: Scalar>(a: &Grassmann<S>, b: &Grassmann<S>) -> f64 {
    let level = a.level().max(b.level());
    (&a.lift(level) - &b.lift(level)).max_abs()
}

/// Integrates with a coarse and a refined pass and checks their agreement.
pub fn integrate_box<S, F>(
    bounds: &[(S, S)],
    spec: &QuadratureSpec,
    mut f: F,
) -> Result<QuadResult<S>>
where
    S: Scalar,
    F: FnMut(&[S]) -> Result<Grassmann<S>>,
{
    if spec.order == 0 || spec.panels == 0 {
        return Err(Error::Precondition(
            "quadrature order and panels must be positive".into(),
        ));
    }
    let (coarse, n1) = integrate_box_fixed(bounds, spec.order, spec.panels, &mut f)?;
    if bounds.is_empty() {
        return Ok(QuadResult {
            value: coarse,
            estimate: 0.0,
            evaluations: n1,
        });
    }
    let (fine, n2) = integrate_box_fixed(bounds, spec.order, 2 * spec.panels, &mut f)?;
    let estimate = max_diff(&coarse, &fine);
    let scale = fine.max_abs().max(1.0);
    if estimate > spec.tol * scale {
        return Err(Error::ToleranceNotMet {
            tol: spec.tol,
            estimate,
        });
    }
    Ok(QuadResult {
        value: fine,
        estimate,
        evaluations: n1 + n2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_integrate_polynomials() {
        for n in 1..20 {
            let r = gauss_legendre(n);
            let s: f64 = r.iter().map(|p| p.1).sum();
            assert!((s - 2.0).abs() < 1e-13, "order {n}");
            // exact up to degree 2n-1
            let d = 2 * n - 1;
            let v: f64 = r.iter().map(|(x, w)| w * x.powi(d as i32 - 1)).sum();
            let exact = if (d - 1) % 2 == 0 {
                2.0 / d as f64
            } else {
                0.0
            };
            assert!((v - exact).abs() < 1e-12, "order {n}");
        }
    }

    #[test]
    fn box_integral_of_exponential() {
        let spec = QuadratureSpec::default();
        let r = integrate_box(&[(0.0, 1.0), (0.0, 2.0)], &spec, |p: &[f64]| {
            Ok(Grassmann::scalar((p[0] + p[1]).exp(), 0))
        })
        .unwrap();
        let exact = (1f64.exp() - 1.0) * (2f64.exp() - 1.0);
        assert!((r.value.body() - exact).abs() < 1e-12);
    }

    #[test]
    fn tolerance_failure_is_reported() {
        let spec = QuadratureSpec {
            order: 2,
            panels: 1,
            tol: 1e-14,
        };
        let r = integrate_box(&[(0.0, 1.0)], &spec, |p: &[f64]| {
            Ok(Grassmann::scalar((10.0 * p[0]).sin(), 0))
        });
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }
}
