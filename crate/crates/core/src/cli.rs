//! Command-line front end. `run` returns the process exit code:
//! 0 when every checked property holds, 1 on a property violation,
//! 2 on usage, parse or IO errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::angles::{
    lifted_angle, spacetime_angle, spacetime_angle_schur, spacetime_angle_spectral,
};
use crate::envelope::{
    rooftop_envelope, solve_dsl_dirichlet, verify_dsl_solution, ProblemJson, RooftopProblem,
    CERT_TOL,
};
use crate::error::{DslError, Result};
use crate::harness::golden::{golden_fixture, ExampleConstants};
use crate::harness::{run_suite, SuiteName, SuiteSpec};
use crate::linalg::{MatrixJson, SpaceTimeMatrix};
use crate::subequations::{
    eigenvalue_consequences, in_dual_f, in_f, in_fcal, in_p, in_star_product, in_t, time_slot_sign,
    DslBranch, SlBranch, StarSearch, DEFAULT_TOL,
};
use crate::SCHEMA;

#[derive(Debug, Parser)]
#[command(
    name = "dslkit",
    version,
    about = "Space-time Lagrangian angles, branch checks and the 1+1 DSL solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// θ̃ and Θ̃ of a matrix, both angle routes.
    Angle(MatrixArgs),
    /// Branch membership report for a space-time matrix.
    Check(CheckArgs),
    /// Rooftop envelope of an obstacle problem.
    Envelope(EnvelopeArgs),
    /// Solve a Dirichlet problem and verify the output.
    Solve(SolveArgs),
    /// Golden diagonal fixture.
    Verify(VerifyArgs),
    /// Run a named verification suite.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Write the primary output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit the JSON report where the default output is CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Matrix JSON of order n + 1.
    #[arg(long)]
    matrix: PathBuf,
    /// Branch phase.
    #[arg(long, allow_hyphen_values = true)]
    c: f64,
    #[arg(long)]
    tol: Option<f64>,
    /// Seed of the ⋆-product search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct EnvelopeArgs {
    /// Rooftop problem JSON: `{xl, xr, h: {xs, values}, f: [fl, fr], a}`.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the branch phase `a`.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Problem JSON.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the branch phase `c`.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Overrides `nt = nx`.
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Constants `{n, eps, delta, eta}`; defaults to (3, 0.05, 0.1, 0.01).
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    /// Suite spec JSON; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<SuiteName>,
    /// Space dimension; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    dim: Vec<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: Output,
}

/// Parses `args` (program name first) and executes the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Angle(a) => angle(a),
        Command::Check(a) => check(a),
        Command::Envelope(a) => envelope(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Suite(a) => suite(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DslError::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn check_schema(v: &serde_json::Value) -> Result<()> {
    match v.get("schema").and_then(|s| s.as_str()) {
        Some(s) if s != SCHEMA => Err(DslError::InvalidInput(format!(
            "schema {s:?}, expected {SCHEMA:?}"
        ))),
        _ => Ok(()),
    }
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let v: serde_json::Value = read_json(path)?;
    check_schema(&v)?;
    Ok(serde_json::from_value(v)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| DslError::Io(format!("{}: {e}", p.display())))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

#[derive(Serialize)]
struct PathValues {
    radians: Option<f64>,
    spectral: Option<f64>,
    schur: Option<f64>,
    certified_interval: Option<[f64; 2]>,
    near_singular: bool,
    error: Option<String>,
}

fn angle(args: MatrixArgs) -> Result<bool> {
    let m: MatrixJson = read_config(&args.matrix)?;
    let full = m.to_sym()?;
    let theta = lifted_angle(&full).radians;
    let mut ok = true;
    let big = if full.n() >= 2 {
        let a = SpaceTimeMatrix::from_sym(&full)?;
        let combined = spacetime_angle(&a);
        if matches!(combined, Err(DslError::CrossCheckMismatch { .. })) {
            ok = false;
        }
        let spectral = spacetime_angle_spectral(&a).ok().map(|v| v.radians);
        let schur = spacetime_angle_schur(&a).ok().map(|v| v.radians);
        Some(match combined {
            Ok(v) => PathValues {
                radians: Some(v.radians),
                spectral,
                schur,
                certified_interval: v.certified_interval,
                near_singular: v.near_singular,
                error: None,
            },
            Err(e) => PathValues {
                radians: None,
                spectral,
                schur,
                certified_interval: None,
                near_singular: false,
                error: Some(e.to_string()),
            },
        })
    } else {
        None
    };
    emit_json(
        args.output.out.as_deref(),
        &json!({
            "schema": SCHEMA,
            "order": full.n(),
            "theta_tilde": theta,
            "Theta_tilde": big,
        }),
    )?;
    Ok(ok)
}

fn check(args: CheckArgs) -> Result<bool> {
    let m: MatrixJson = read_config(&args.matrix)?;
    let full = m.to_sym()?;
    let a = SpaceTimeMatrix::from_sym(&full)?;
    let n = a.n();
    let tol = args.tol.unwrap_or(DEFAULT_TOL);
    let dsl = DslBranch::new(n, args.c)?;
    let sl = SlBranch::new(n + 1, args.c)?;
    let theta = spacetime_angle(&a)?;
    let fcal = in_fcal(&a, &dsl, tol)?;
    let star = if dsl.is_top_two() {
        let search = StarSearch {
            tol,
            ..StarSearch::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        Some(in_star_product(&a, &dsl, &search, &mut rng)?)
    } else {
        None
    };
    let slot = if dsl.is_top_two() && fcal {
        Some(time_slot_sign(&a, &dsl)?)
    } else {
        None
    };
    let eig = eigenvalue_consequences(&full);
    // A ⋆ disagreement counts only outside the tolerance-sensitive band.
    let boundary = (theta.radians - args.c).abs() < 1e-6 || a.a00.abs() < 1e-6;
    let star_ok = star.as_ref().is_none_or(|s| boundary || s.member == fcal);
    let slot_ok = slot.is_none_or(|s| s.a00_nonneg);
    let ok = star_ok && slot_ok && eig.top_branch_psd_ok && eig.second_branch_dominance_ok;
    emit_json(
        args.output.out.as_deref(),
        &json!({
            "schema": SCHEMA,
            "n": n,
            "c": args.c,
            "tier": dsl.tier(),
            "Theta_tilde": theta.radians,
            "F_c": in_f(&full, &sl, tol)?,
            "Fcal_c": fcal,
            "star_product": star,
            "dual": in_dual_f(&full, &sl, tol)?,
            "predicates": {
                "P": in_p(&full, tol),
                "T": in_t(&full),
                "time_slot": slot,
                "eigenvalue_lemma": eig,
                "boundary_band": boundary,
            },
            "pass": ok,
        }),
    )?;
    Ok(ok)
}

fn envelope(args: EnvelopeArgs) -> Result<bool> {
    let mut p: RooftopProblem = read_config(&args.config)?;
    if let Some(a) = args.c {
        p.a = a;
    }
    let p = RooftopProblem::new(p.xl, p.xr, p.h, p.f, p.a)?;
    let tol = args.tol.unwrap_or(CERT_TOL);
    let w = rooftop_envelope(&p);
    let over = p
        .barrier()
        .iter()
        .zip(&w.values)
        .map(|(b, v)| v - b.1)
        .fold(0.0, f64::max);
    let mut worst = f64::INFINITY;
    for i in 1..w.len().saturating_sub(1) {
        let (x0, x1, x2) = (w.xs[i - 1], w.xs[i], w.xs[i + 1]);
        let d = 2.0
            * ((w.values[i + 1] - w.values[i]) / (x2 - x1)
                - (w.values[i] - w.values[i - 1]) / (x1 - x0))
            / (x2 - x0);
        let h = (x1 - x0).min(x2 - x1);
        let bound = p.slope_bound().unwrap_or(f64::NEG_INFINITY);
        worst = worst.min((d - bound) * h * h);
    }
    let ok = over <= tol && worst >= -tol;
    if args.output.json {
        emit_json(
            args.output.out.as_deref(),
            &json!({
                "schema": SCHEMA,
                "a": p.a,
                "envelope": w,
                "above_barrier": over,
                "constraint_slack": if worst.is_finite() { Some(worst) } else { None },
                "pass": ok,
            }),
        )?;
    } else {
        emit(args.output.out.as_deref(), &w.to_csv())?;
    }
    Ok(ok)
}

fn solve(args: SolveArgs) -> Result<bool> {
    let mut cfg: ProblemJson = read_config(&args.config)?;
    if let Some(c) = args.c {
        cfg.c = c;
    }
    if let Some(g) = args.grid {
        cfg.grid.nt = g;
        cfg.grid.nx = g;
    }
    let p = cfg.to_problem()?;
    let u = solve_dsl_dirichlet(&p)?;
    let report = verify_dsl_solution(&u, cfg.c, &p.boundary);
    let ok = report.pass();
    if args.output.json {
        if let Some(path) = args.output.out.as_deref() {
            u.write_csv(path, "t")?;
        }
        emit_json(
            None,
            &json!({ "schema": SCHEMA, "pass": ok, "verification": report }),
        )?;
    } else {
        emit(args.output.out.as_deref(), &u.to_csv("t"))?;
    }
    Ok(ok)
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let k = match &args.config {
        Some(p) => read_config(p)?,
        None => ExampleConstants::default(),
    };
    let r = golden_fixture(&k)?;
    emit_json(
        args.output.out.as_deref(),
        &json!({ "schema": SCHEMA, "golden": r }),
    )?;
    Ok(r.pass)
}

fn suite(args: SuiteArgs) -> Result<bool> {
    let mut spec = match &args.config {
        Some(p) => read_config::<SuiteSpec>(p)?,
        None => {
            let name = args
                .name
                .ok_or_else(|| DslError::InvalidInput("suite needs --name or --config".into()))?;
            SuiteSpec::new(name, vec![1, 2, 3], 1000, 0)
        }
    };
    if let Some(n) = args.name {
        spec.name = n;
    }
    if !args.dim.is_empty() {
        spec.dims = args.dim;
    }
    if let Some(s) = args.samples {
        spec.samples = s;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(t) = args.tol {
        spec.tolerances.tol = Some(t);
    }
    let report = run_suite(&spec)?;
    emit_json(args.output.out.as_deref(), &report)?;
    Ok(report.pass)
}
