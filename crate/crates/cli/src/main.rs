mod expr;
mod problem;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use superint::quadrature::QuadratureSpec;
use superint::verify::{self, VerifyConfig, VerifyReport, SUITES};
use superint::vvintegral::example1;
use superint::{AlgebraError, Error, Grassmann, Scalar, Q};

use crate::problem::{Method, Outcome, ProblemSpec};
use crate::report::{render, Element, Example1Json, IntegrateReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("residual check failed: {0}")]
    Residual(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Residual(_) => 1,
            CliError::Usage(_) | CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Algebra(AlgebraError::Parse(m)) => CliError::Parse(m),
            Error::ToleranceNotMet { .. } => CliError::Residual(e.to_string()),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "superint",
    version,
    about = "Superanalysis integrals and change-of-variables checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct QuadArgs {
    /// Gauss–Legendre nodes per panel.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Panels per axis.
    #[arg(long)]
    quad_panels: Option<usize>,
    /// Tolerance for quadrature results and residuals.
    #[arg(long)]
    tol: Option<f64>,
}

impl QuadArgs {
    fn apply(&self, mut q: QuadratureSpec) -> QuadratureSpec {
        q.order = self.quad_order.unwrap_or(q.order);
        q.panels = self.quad_panels.unwrap_or(q.panels);
        q
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a randomized property suite.
    Verify {
        /// One of the suite names, or `all`.
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Cases per law; each suite has its own default.
        #[arg(long)]
        cases: Option<usize>,
        /// Grassmann generators available to random coefficients.
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[command(flatten)]
        quad: QuadArgs,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compare naive and VV integrals for `φ = (y + ω1ω2 f(y), ω)` and `u = u0 + θ1θ2 u1`.
    Example1 {
        #[arg(long, default_value = "q")]
        u0: String,
        #[arg(long, default_value = "1")]
        u1: String,
        /// The profile `f`.
        #[arg(long, default_value = "q")]
        phi: String,
        /// Body interval as `lo,hi`.
        #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
        omega: String,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Evaluate the integral described by a TOML problem file.
    Integrate {
        problem: PathBuf,
        /// Overrides `level` in the file.
        #[arg(long)]
        level: Option<u32>,
        /// Overrides `seed` in the file.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        quad: QuadArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn emit_json(target: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match target {
        Some(p) if p == Path::new("-") => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => Ok(()),
    }
}

fn json_to_stdout(target: &Option<PathBuf>) -> bool {
    target.as_deref() == Some(Path::new("-"))
}

fn print_verify(report: &VerifyReport) {
    for suite in &report.suites {
        println!("suite {} (seed {})", suite.suite, suite.seed);
        for law in &suite.laws {
            let bound = law
                .tolerance
                .map_or("exact".to_string(), |t| format!("tol {t:e}"));
            println!(
                "  {} {}: {} cases, max residual {:e} ({bound})",
                if law.passed { "PASS" } else { "FAIL" },
                law.law,
                law.cases,
                law.max_residual
            );
            if let Some(f) = &law.first_failure {
                println!("       first failure: {f}");
            }
        }
    }
    println!(
        "{}",
        if report.passed {
            "all laws passed"
        } else {
            "some laws failed"
        }
    );
}

fn cmd_verify(
    suite: &str,
    seed: u64,
    cases: Option<usize>,
    level: u32,
    quad: &QuadArgs,
    json: &Option<PathBuf>,
) -> Result<(), CliError> {
    if suite != "all" && !SUITES.contains(&suite) {
        return Err(CliError::Usage(format!(
            "unknown suite '{suite}'; expected one of {} or all",
            SUITES.join(", ")
        )));
    }
    let defaults = VerifyConfig::default();
    let cfg = VerifyConfig {
        seed,
        cases,
        level,
        tol: quad.tol.unwrap_or(defaults.tol),
        quad: quad.apply(defaults.quad),
    };
    let report = verify::run(suite, &cfg)?;
    if !json_to_stdout(json) {
        print_verify(&report);
    }
    emit_json(json, &render(&report))?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Residual("see report".into()))
    }
}

fn parse_interval(text: &str) -> Result<(Q, Q), CliError> {
    let bad = || CliError::Parse(format!("interval must be 'lo,hi', got {text:?}"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let lo = Q::parse_scalar(a).ok_or_else(bad)?;
    let hi = Q::parse_scalar(b).ok_or_else(bad)?;
    if lo >= hi {
        return Err(CliError::Precondition(format!("empty interval ({a}, {b})")));
    }
    Ok((lo, hi))
}

fn cmd_example1(
    u0: &str,
    u1: &str,
    phi: &str,
    omega: &str,
    json: &Option<PathBuf>,
) -> Result<(), CliError> {
    let parse =
        |s: &str| expr::parse_univariate::<Q>(s).map_err(|e| CliError::Parse(e.to_string()));
    let (u0, u1, f) = (parse(u0)?, parse(u1)?, parse(phi)?);
    let (lo, hi) = parse_interval(omega)?;
    let r = example1(&u0, &u1, &f, lo.clone(), hi.clone())?;
    let passed = r.vv.residual.is_zero();
    let out = Example1Json {
        omega: (lo.to_string(), hi.to_string()),
        naive_lhs: Element::new(&r.naive.naive_lhs),
        naive_rhs: Element::new(&r.naive.naive_rhs),
        discrepancy: Element::new(&r.naive.discrepancy),
        boundary_term: Element::new(&r.naive.boundary_term),
        vv_lhs: Element::new(&r.vv.lhs),
        vv_rhs: Element::new(&r.vv.rhs),
        vv_residual: Element::new(&r.vv.residual),
        sdet_phi: r.sdet_phi.to_string(),
        passed,
    };
    if !json_to_stdout(json) {
        println!("naive lhs:     {}", out.naive_lhs.text);
        println!("naive rhs:     {}", out.naive_rhs.text);
        println!("discrepancy:   {}", out.discrepancy.text);
        println!("vv residual:   {}", out.vv_residual.text);
        println!("boundary term: {}", out.boundary_term.text);
        println!("sdet J(phi):   {}", out.sdet_phi);
    }
    emit_json(json, &render(&out))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Residual(format!(
            "VV residual {} is not zero",
            out.vv_residual.text
        )))
    }
}

fn within<S: Scalar>(g: &Grassmann<S>, tol: Option<f64>) -> bool {
    match tol {
        None => g.is_zero(),
        Some(t) => g.max_abs() <= t,
    }
}

fn run_problem<S: Scalar>(
    spec: &ProblemSpec,
    tol: Option<f64>,
) -> Result<IntegrateReport, CliError> {
    let mut report = IntegrateReport {
        mode: format!("{:?}", spec.mode).to_lowercase(),
        method: format!("{:?}", spec.method).to_lowercase(),
        level: spec.level,
        seed: spec.seed,
        value: None,
        lhs: None,
        rhs: None,
        residual: None,
        tolerance: tol,
        passed: true,
    };
    match spec.evaluate::<S>()? {
        Outcome::Value(v) => {
            if let Some(e) = &spec.expect {
                let want = spec.grassmann::<S>(e)?;
                let level = v.level().max(want.level());
                let r = &v.lift(level) - &want.lift(level);
                report.passed = within(&r, tol);
                report.residual = Some(Element::new(&r));
            }
            report.value = Some(Element::new(&v));
        }
        Outcome::Cvf { lhs, rhs, residual } => {
            report.passed = within(&residual, tol);
            report.lhs = Some(Element::new(&lhs));
            report.rhs = Some(Element::new(&rhs));
            report.residual = Some(Element::new(&residual));
        }
    }
    Ok(report)
}

fn cmd_integrate(
    path: &Path,
    level: Option<u32>,
    seed: Option<u64>,
    quad: &QuadArgs,
    json: &Option<PathBuf>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut text_spec: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    if let Some(l) = level {
        text_spec.insert("level".into(), toml::Value::Integer(l.into()));
    }
    if let Some(s) = seed {
        text_spec.insert("seed".into(), toml::Value::Integer(s as i64));
    }
    let mut spec = ProblemSpec::from_toml(
        &toml::to_string(&text_spec).map_err(|e| CliError::Parse(e.to_string()))?,
    )?;
    spec.quad = quad.apply(spec.quad);
    if let Some(t) = quad.tol {
        spec.quad.tol = t;
    }
    let report = match spec.method {
        Method::Exact => run_problem::<Q>(&spec, None)?,
        Method::Quadrature => run_problem::<f64>(&spec, Some(quad.tol.unwrap_or(1e-10)))?,
    };
    if !json_to_stdout(json) {
        if let Some(v) = &report.value {
            println!("{}", v.text);
        }
        for (label, e) in [
            ("lhs", &report.lhs),
            ("rhs", &report.rhs),
            ("residual", &report.residual),
        ] {
            if let Some(e) = e {
                println!("{label}: {}", e.text);
            }
        }
    }
    emit_json(json, &render(&report))?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Residual(format!(
            "residual {} exceeds tolerance",
            report.residual.map(|r| r.text).unwrap_or_default()
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify {
            suite,
            seed,
            cases,
            level,
            quad,
            json,
        } => cmd_verify(suite, *seed, *cases, *level, quad, json),
        Command::Example1 {
            u0,
            u1,
            phi,
            omega,
            json,
        } => cmd_example1(u0, u1, phi, omega, json),
        Command::Integrate {
            problem,
            level,
            seed,
            quad,
            json,
        } => cmd_integrate(problem, *level, *seed, quad, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("superint: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
