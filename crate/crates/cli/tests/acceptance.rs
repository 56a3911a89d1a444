//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use superint::verify::{self, LawReport, SuiteReport, VerifyConfig};
use superint::vvintegral::example1;
use superint::{Grassmann, SuperPoly, Q};

struct Outcome {
    ok: bool,
    detail: String,
}

fn q(v: i64) -> Q {
    Q::from_integer(v.into())
}

fn scalar(v: i64) -> Grassmann<Q> {
    Grassmann::scalar(q(v), 0)
}

fn poly(c: &[i64]) -> SuperPoly<Q> {
    SuperPoly::univariate(&c.iter().map(|&v| q(v)).collect::<Vec<_>>(), 0)
}

/// Runs a suite at its default sizes. Exact laws need a zero residual,
/// tolerance laws a bound at or below `tol`; each `(law prefix, n)` pair
/// requires at least `n` cases of that law.
fn suite(name: &str, tol: f64, budget: Option<Duration>, counts: &[(&str, usize)]) -> Outcome {
    let start = Instant::now();
    let report = match verify::run(name, &VerifyConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                ok: false,
                detail: e.to_string(),
            }
        }
    };
    let elapsed = start.elapsed();
    let s: &SuiteReport = &report.suites[0];
    let bad: Vec<&LawReport> = s
        .laws
        .iter()
        .filter(|l| {
            let bound = match l.tolerance {
                None => l.max_residual == 0.0,
                Some(t) => t <= tol && l.max_residual <= tol,
            };
            !l.passed || !bound
        })
        .collect();
    let mut ok = bad.is_empty() && !s.laws.is_empty();
    let mut detail = format!("{} laws, {:.2}s", s.laws.len(), elapsed.as_secs_f64());
    if let Some(b) = budget {
        if elapsed >= b {
            ok = false;
            detail.push_str(&format!(" (budget {}s exceeded)", b.as_secs()));
        }
    }
    if let Some(l) = bad.first() {
        detail.push_str(&format!("; failing law: {} ({:?})", l.law, l.first_failure));
    }
    for (prefix, n) in counts {
        match s.laws.iter().find(|l| l.law.starts_with(prefix)) {
            Some(l) if l.cases >= *n => {
                detail.push_str(&format!("; {} cases of '{prefix}'", l.cases))
            }
            Some(l) => {
                ok = false;
                detail.push_str(&format!("; only {} cases of '{prefix}', need {n}", l.cases));
            }
            None => {
                ok = false;
                detail.push_str(&format!("; no law '{prefix}'"));
            }
        }
    }
    Outcome { ok, detail }
}

fn criterion_1() -> Outcome {
    let five = Some(Duration::from_secs(5));
    suite(
        "berezin-axioms",
        0.0,
        five,
        &[
            ("right-linearity", 100),
            ("integration by parts", 100),
            ("delta", 100),
        ],
    )
}

fn criterion_2() -> Outcome {
    suite(
        "sdet",
        0.0,
        Some(Duration::from_secs(5)),
        &[("sdet block formulas", 50), ("sdet(PQ)", 50)],
    )
}

fn criterion_3() -> Outcome {
    suite(
        "contour",
        1e-10,
        None,
        &[
            ("fundamental theorem", 50),
            ("path independence", 20),
            ("nilpotent shift", 1),
        ],
    )
}

fn criterion_4() -> Outcome {
    suite(
        "linear-cvf",
        0.0,
        None,
        &[("each elementary step", 30), ("int u((y,w)M)", 30)],
    )
}

fn criterion_5() -> Outcome {
    // closed-form oracle: ∫₀¹ (q·q)' dq = 1² − 0² = 1
    let r = match example1(&poly(&[0, 1]), &poly(&[1]), &poly(&[0, 1]), q(0), q(1)) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                ok: false,
                detail: e.to_string(),
            }
        }
    };
    let naive = r.naive.naive_lhs == scalar(1)
        && r.naive.naive_rhs == scalar(2)
        && r.naive.discrepancy == scalar(1);
    let vv = r.vv.residual.is_zero();
    // u0 = q²(1 − q)² vanishes at both ends, so the boundary term does too
    let bump = poly(&[0, 0, 1, -2, 1]);
    let compact = example1(&bump, &poly(&[1]), &poly(&[0, 1]), q(0), q(1))
        .map(|r| r.naive.discrepancy.is_zero());
    let ok = naive && vv && compact == Ok(true);
    Outcome {
        ok,
        detail: format!(
            "naive {} vs {}, discrepancy {}, VV residual {}, endpoint-vanishing discrepancy zero: {:?}",
            r.naive.naive_lhs, r.naive.naive_rhs, r.naive.discrepancy, r.vv.residual, compact
        ),
    }
}

fn criterion_6() -> Outcome {
    suite(
        "vv-cvf",
        1e-10,
        None,
        &[("int_M u", 20), ("change of variables with oracle", 1)],
    )
}

fn criterion_7() -> Outcome {
    suite(
        "reparam",
        1e-10,
        None,
        &[("odd reparametrization", 1), ("monotone body", 1)],
    )
}

fn criterion_8() -> Outcome {
    suite(
        "total-derivative",
        0.0,
        None,
        &[("top(Ber H", 20), ("for h = y + w1 w2 p", 1)],
    )
}

fn criterion_9() -> Outcome {
    let dir = std::env::temp_dir().join(format!("superint-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let run = |k: usize| -> Result<Vec<u8>, String> {
        let path = dir.join(format!("run{k}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_superint"))
            .args(["verify", "all", "--seed", "42", "--cases", "5", "--json"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("exit {:?}", status.status.code()));
        }
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let outcome = match (run(1), run(2)) {
        (Ok(a), Ok(b)) => Outcome {
            ok: a == b && !a.is_empty(),
            detail: format!("{} bytes, identical: {}", a.len(), a == b),
        },
        (Err(e), _) | (_, Err(e)) => Outcome {
            ok: false,
            detail: e,
        },
    };
    let _ = std::fs::remove_dir_all(&dir);
    outcome
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "Berezin axioms, exact, 100 cases per law, < 5 s",
            criterion_1,
        ),
        (
            "sdet formulas, multiplicativity and the soul-shift Jacobians, exact, < 5 s",
            criterion_2,
        ),
        (
            "contour fundamental theorem exact; homotopic paths within 1e-10",
            criterion_3,
        ),
        (
            "linear change of variables through four elementary steps, exact",
            criterion_4,
        ),
        (
            "counterexample: naive 1 vs 2, VV residual 0, compact-support regime",
            criterion_5,
        ),
        (
            "VV change of variables exact, quadrature within 1e-10",
            criterion_6,
        ),
        (
            "reparametrization invariance exact and under quadrature",
            criterion_7,
        ),
        (
            "total-derivative identity for m = 1, 2 with witness (p u0)'",
            criterion_8,
        ),
        (
            "byte-identical verify reports for a fixed seed",
            criterion_9,
        ),
    ];
    let mut failed = 0;
    for (i, (label, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.ok {
            failed += 1;
        }
        println!(
            "criterion {}: {} - {label} [{}]",
            i + 1,
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
