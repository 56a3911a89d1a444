use std::path::PathBuf;
use std::process::{Command, Output};

fn superint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn problem(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("superint-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

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

const CONTOUR: &str = r#"
level = 0
mode = "contour"
dims = [1, 0]
[functions.u]
terms = [{ poly = [{ exp = [1], coeff = 1 }] }]
[function]
u = "u"
[path]
coeffs = [0, 1]
"#;

const SINGULAR: &str = r#"
level = 0
mode = "vv"
dims = [1, 2]
[functions.u]
terms = [{ odd = [1, 2], poly = [{ coeff = 1 }] }]
[functions.c]
terms = [{ poly = [{ coeff = 3 }] }]
[functions.w1]
terms = [{ odd = [1], poly = [{ coeff = 1 }] }]
[functions.w2]
terms = [{ odd = [2], poly = [{ coeff = 1 }] }]
[manifold]
gamma = { even = ["c"], odd = ["w1", "w2"] }
[function]
u = "u"
[domain]
lo = [0]
hi = [1]
"#;

/// Soul shift `(y + ω1ω2 y, ω)` with its inverse.
const CVF: &str = r#"
level = 1
mode = "cvf"
dims = [1, 2]
[functions.u]
terms = [
  { poly = [{ exp = [1], coeff = "1 + s[1]" }] },
  { odd = [1, 2], poly = [{ coeff = 1 }, { exp = [2], coeff = "1/3" }] },
]
[functions.fwd]
terms = [{ poly = [{ exp = [1], coeff = 1 }] }, { odd = [1, 2], poly = [{ exp = [1], coeff = 1 }] }]
[functions.back]
terms = [{ poly = [{ exp = [1], coeff = 1 }] }, { odd = [1, 2], poly = [{ exp = [1], coeff = -1 }] }]
[functions.w1]
terms = [{ odd = [1], poly = [{ coeff = 1 }] }]
[functions.w2]
terms = [{ odd = [2], poly = [{ coeff = 1 }] }]
[map]
phi = { even = ["fwd"], odd = ["w1", "w2"] }
phi_inverse = { even = ["back"], odd = ["w1", "w2"] }
[function]
u = "u"
[domain]
lo = [0]
hi = [1]
"#;

#[test]
fn trivial_foliation_integrates_to_one() {
    let o = superint(&["integrate", problem("flat.toml", FLAT).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn contour_of_x_over_unit_path_is_one_half() {
    let o = superint(&[
        "integrate",
        problem("contour.toml", CONTOUR).to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1/2");
}

#[test]
fn singular_jacobian_is_a_precondition_failure_naming_q() {
    let o = superint(&[
        "integrate",
        problem("singular.toml", SINGULAR).to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q = ["));
}

#[test]
fn cvf_problem_has_zero_residual() {
    let o = superint(&[
        "integrate",
        problem("cvf.toml", CVF).to_str().unwrap(),
        "--json",
        "-",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["residual"]["terms"], serde_json::json!([]));
    assert_eq!(v["passed"], true);
}

#[test]
fn wrong_expectation_is_a_residual_failure() {
    let text = CONTOUR.replace("dims = [1, 0]", "dims = [1, 0]\nexpect = \"1/3\"");
    let o = superint(&["integrate", problem("expect.toml", &text).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn quadrature_method_matches_exact_value() {
    let text = CONTOUR.replace(
        "dims = [1, 0]",
        "dims = [1, 0]\nmethod = \"quadrature\"\nexpect = \"1/2\"",
    );
    let o = superint(&[
        "integrate",
        problem("quad.toml", &text).to_str().unwrap(),
        "--quad-order",
        "4",
        "--quad-panels",
        "2",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn parse_errors_exit_two() {
    let o = superint(&[
        "integrate",
        problem("bad.toml", "level = ").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let short = FLAT.replace("coeff = 1", "coeff = \"s[2]\"");
    let o = superint(&["integrate", problem("short.toml", &short).to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 2"));
    let o = superint(&[
        "integrate",
        problem("short.toml", &short).to_str().unwrap(),
        "--level",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(
        superint(&["verify", "unknown-suite"]).status.code(),
        Some(2)
    );
    assert_eq!(superint(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn berezin_axioms_pass_at_full_size() {
    let o = superint(&["verify", "berezin-axioms", "--cases", "100", "--json", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let laws = v["suites"][0]["laws"].as_array().unwrap();
    assert!(laws.len() >= 7);
    assert!(laws
        .iter()
        .all(|l| l["passed"] == true && l["cases"].as_u64().unwrap() >= 7));
    assert_eq!(v["seed"], 1);
}

#[test]
fn sdet_suite_passes() {
    let o = superint(&["verify", "sdet", "--cases", "50"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS sdet(PQ) = sdet(P) sdet(Q)"));
}

#[test]
fn example1_reproduces_the_counterexample() {
    let o = superint(&[
        "example1", "--u0", "q", "--u1", "1", "--phi", "q", "--omega", "0,1", "--json", "-",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["naive_lhs"]["text"], "1");
    assert_eq!(v["naive_rhs"]["text"], "2");
    assert_eq!(v["discrepancy"]["text"], "1");
    assert_eq!(v["vv_residual"]["text"], "0");
}

#[test]
fn example1_without_shift_or_with_vanishing_u0_has_no_discrepancy() {
    for args in [["--phi", "0"], ["--u0", "q^2*(1 - q)^2"]] {
        let o = superint(&["example1", args[0], args[1]]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("discrepancy:   0"), "{}", stdout(&o));
    }
}

#[test]
fn example1_rejects_bad_polynomials() {
    assert_eq!(superint(&["example1", "--u0", "q^"]).status.code(), Some(2));
    assert_eq!(
        superint(&["example1", "--omega", "1,0"]).status.code(),
        Some(3)
    );
}

#[test]
fn shipped_problem_files_pass() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let o = superint(&["integrate", path.to_str().unwrap()]);
            assert_eq!(
                o.status.code(),
                Some(0),
                "{}: {}",
                path.display(),
                String::from_utf8_lossy(&o.stderr)
            );
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
