//! Command-line front end: special-function evaluation, solution
//! construction, residual verification and the identity suites.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fox_h::{self, HFunctionSpec};
use crate::solver_ode::{self, OdeProblem, OdeSolution};
use crate::solver_pde::{self, Branch, D2Variant, DiffusionProblem, PdeSolution};
use crate::verify::{self, ResidualReport};
use crate::wright::{self, WrightSpec};

/// Exit status for a failed verification.
pub const EXIT_FAIL: u8 = 2;
/// Exit status for malformed input or a domain error.
pub const EXIT_ERROR: u8 = 1;

const DEFAULT_H: f64 = 1e-4;
const DEFAULT_PDE_GRID: &str = "x=0.5:2:5,t=0.5:2:5";
const DEFAULT_ODE_GRID: &str = "z=0.5:2:5";

#[derive(Debug, Parser)]
#[command(
    name = "fracsol",
    version,
    about = "Fox H / Wright evaluators and explicit solutions of time-fractional diffusion equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a special function at a list of points.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Construct a solution and optionally sample it.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Residual check of a problem's solution; exits 2 on FAIL.
    Verify(VerifyArgs),
    /// Run a seeded identity suite; exits 2 on FAIL.
    Identities(IdentitiesArgs),
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Generalized Wright function; spec `{"upper":[[a,alpha],..],"lower":[[b,beta],..]}`.
    Wright(SpecEvalArgs),
    /// Fox H-function; spec `{"m":..,"l":..,"upper":[[A,alpha],..],"lower":[[B,beta],..]}`.
    Foxh(SpecEvalArgs),
    /// Mittag-Leffler function E_{alpha,beta}.
    Ml(MlArgs),
}

#[derive(Debug, Subcommand)]
pub enum SolveCommand {
    /// Fractional Euler-type ODE; problem `{"alpha":..,"m":..,"a_coeffs":[..]}`.
    Ode(SolveOdeArgs),
    /// Diffusion PDE; problem `{"alpha","m","d","A","B","C","a","constants"}`.
    Pde(SolvePdeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum D2VariantArg {
    Derivation,
    Statement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemma1,
    HTransforms,
    Reduction,
    WrightReductions,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Inline JSON input.
    #[arg(long, conflicts_with = "input")]
    pub json: Option<String>,
    /// Path of a JSON input file.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpecEvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated points; an item `a:b:n` expands to n points.
    #[arg(long, required = true, allow_hyphen_values = true)]
    pub z: String,
    /// Geometric spacing for `a:b:n` items.
    #[arg(long)]
    pub log_grid: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MlArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Comma-separated points; an item `a:b:n` expands to n points.
    #[arg(long, required = true, allow_hyphen_values = true)]
    pub z: String,
    /// Geometric spacing for `a:b:n` items.
    #[arg(long)]
    pub log_grid: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SolveOdeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Sample points; without them the solution descriptor is printed.
    #[arg(long)]
    pub z: Option<String>,
    /// Geometric spacing for `a:b:n` items.
    #[arg(long)]
    pub log_grid: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PdeChoice {
    /// Sign branch of the alpha = 1 closed form.
    #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
    pub branch: BranchArg,
    /// Use the general theorem form even when the alpha = 1 closed form applies.
    #[arg(long)]
    pub no_closed_form: bool,
    /// Parameter form of the d = 2 branch.
    #[arg(long, value_enum, default_value_t = D2VariantArg::Derivation)]
    pub d2_variant: D2VariantArg,
}

#[derive(Debug, Args)]
pub struct SolvePdeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Sample grid `x=a:b:n,t=a:b:n`; without it the descriptor is printed.
    #[arg(long)]
    pub grid: Option<String>,
    /// Geometric grid spacing.
    #[arg(long)]
    pub log_grid: bool,
    #[command(flatten)]
    pub choice: PdeChoice,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Grid `x=a:b:n,t=a:b:n` for PDE problems or `z=a:b:n` for ODE problems.
    #[arg(long)]
    pub grid: Option<String>,
    /// Geometric grid spacing.
    #[arg(long)]
    pub log_grid: bool,
    /// Grunwald-Letnikov step for the H-function forms.
    #[arg(long, default_value_t = DEFAULT_H)]
    pub h: f64,
    /// Pass threshold on max_rel_err [default: 1e-3 for Grunwald-Letnikov, 1e-8 otherwise].
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub choice: PdeChoice,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Number of random draws [default: 1000 for lemma1, 200 for reduction].
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Pass threshold [default: 1e-11 lemma1, 1e-6 h-transforms, 1e-10 otherwise].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of one invocation: text for the output sink plus an optional
/// verdict line.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub verdict: Option<(bool, String)>,
}

/// Parses the arguments, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_ERROR);
    }
    let out_path = out_path(&cli.command);
    match run(&cli.command) {
        Ok(outcome) => {
            if let Err(e) = write_output(out_path, &outcome.body) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_ERROR);
            }
            match outcome.verdict {
                Some((pass, line)) => {
                    eprintln!("{line}");
                    if pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_FAIL)
                    }
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FRACSOL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Input(format!("FRACSOL_THREADS must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(Error::Input("FRACSOL_THREADS must be at least 1".into()));
    }
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn out_path(cmd: &Command) -> Option<&PathBuf> {
    match cmd {
        Command::Eval(EvalCommand::Wright(a) | EvalCommand::Foxh(a)) => a.output.out.as_ref(),
        Command::Eval(EvalCommand::Ml(a)) => a.output.out.as_ref(),
        Command::Solve(SolveCommand::Ode(a)) => a.output.out.as_ref(),
        Command::Solve(SolveCommand::Pde(a)) => a.output.out.as_ref(),
        Command::Verify(a) => a.out.as_ref(),
        Command::Identities(a) => a.out.as_ref(),
    }
}

fn write_output(path: Option<&PathBuf>, body: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| Error::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Runs a parsed command without touching stdout.
pub fn run(cmd: &Command) -> Result<Outcome> {
    let body_only = |body| Ok(Outcome { body, verdict: None });
    match cmd {
        Command::Eval(EvalCommand::Wright(a)) => body_only(eval_wright(a)?),
        Command::Eval(EvalCommand::Foxh(a)) => body_only(eval_foxh(a)?),
        Command::Eval(EvalCommand::Ml(a)) => body_only(eval_ml(a)?),
        Command::Solve(SolveCommand::Ode(a)) => body_only(solve_ode(a)?),
        Command::Solve(SolveCommand::Pde(a)) => body_only(solve_pde(a)?),
        Command::Verify(a) => run_verify(a),
        Command::Identities(a) => run_identities(a),
    }
}

fn read_input(args: &InputArgs) -> Result<String> {
    match (&args.json, &args.input) {
        (Some(s), _) => Ok(s.clone()),
        (None, Some(p)) => {
            std::fs::read_to_string(p).map_err(|e| Error::Input(format!("cannot read {}: {e}", p.display())))
        }
        (None, None) => Err(Error::Input("one of --json or --input is required".into())),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("malformed {what} JSON: {e}")))
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Input(format!("not a number: {s:?}")))
}

/// Expands `start:stop:count` with inclusive endpoints.
pub fn parse_range(spec: &str, log: bool) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Input(format!("range {spec:?} is not start:stop:count")));
    }
    let (a, b) = (parse_number(parts[0])?, parse_number(parts[1])?);
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::Input(format!("count in {spec:?} is not a non-negative integer")))?;
    if n == 0 {
        return Err(Error::Input(format!("range {spec:?} needs a count of at least 1")));
    }
    if log && !(a > 0.0 && b > 0.0) {
        return Err(Error::Input(format!(
            "log spacing needs positive endpoints in {spec:?}"
        )));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            if i == n - 1 {
                b
            } else if log {
                a * (b / a).powf(f)
            } else {
                a + (b - a) * f
            }
        })
        .collect())
}

/// A comma-separated list of numbers and `a:b:n` ranges.
pub fn parse_points(spec: &str, log: bool) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        if item.contains(':') {
            out.extend(parse_range(item, log)?);
        } else {
            out.push(parse_number(item)?);
        }
    }
    Ok(out)
}

/// Parses `name=a:b:n,name=a:b:n` into named axes.
pub fn parse_grid(spec: &str, log: bool) -> Result<Vec<(String, Vec<f64>)>> {
    let mut axes: Vec<(String, Vec<f64>)> = Vec::new();
    for item in spec.split(',') {
        let (name, range) = item
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("grid axis {item:?} is not name=start:stop:count")))?;
        let name = name.trim().to_string();
        if axes.iter().any(|(n, _)| *n == name) {
            return Err(Error::Input(format!("grid axis {name} given twice")));
        }
        axes.push((name, parse_range(range, log)?));
    }
    Ok(axes)
}

fn axis<'a>(axes: &'a [(String, Vec<f64>)], name: &str) -> Result<&'a [f64]> {
    axes.iter()
        .find(|(n, _)| n == name)
        .map(|(_, v)| v.as_slice())
        .ok_or_else(|| Error::Input(format!("grid is missing axis {name}")))
}

fn pde_grid(spec: &str, log: bool) -> Result<Vec<(f64, f64)>> {
    let axes = parse_grid(spec, log)?;
    if let Some((n, _)) = axes.iter().find(|(n, _)| n != "x" && n != "t") {
        return Err(Error::Input(format!("unknown grid axis {n} (expected x and t)")));
    }
    let (xs, ts) = (axis(&axes, "x")?, axis(&axes, "t")?);
    let grid: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ts.iter().map(move |&t| (x, t))).collect();
    if grid.iter().any(|(x, t)| !(*x > 0.0 && *t > 0.0)) {
        return Err(Error::Input("PDE grid points must satisfy x > 0 and t > 0".into()));
    }
    Ok(grid)
}

fn ode_grid(spec: &str, log: bool) -> Result<Vec<f64>> {
    let axes = parse_grid(spec, log)?;
    if axes.len() != 1 || axes[0].0 != "z" {
        return Err(Error::Input("ODE grid must be a single axis z=start:stop:count".into()));
    }
    let zs = axes[0].1.clone();
    if zs.iter().any(|z| !(*z > 0.0)) {
        return Err(Error::Input("ODE grid points must be positive".into()));
    }
    Ok(zs)
}

fn all_real(values: &[Complex64]) -> bool {
    values.iter().all(|v| v.im == 0.0)
}

/// Appends one value as `re` or `re,im`.
fn push_value(line: &mut String, v: Complex64, complex: bool) {
    if complex {
        let _ = write!(line, ",{},{}", v.re, v.im);
    } else {
        let _ = write!(line, ",{}", v.re);
    }
}

fn value_header(name: &str, complex: bool) -> String {
    if complex {
        format!("{name}_re,{name}_im")
    } else {
        name.to_string()
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Input(format!("serialization failed: {e}")))
}

fn eval_wright(a: &SpecEvalArgs) -> Result<String> {
    let spec: WrightSpec = parse_json(&read_input(&a.input)?, "Wright spec")?;
    let zs = parse_points(&a.z, a.log_grid)?;
    let values = zs
        .par_iter()
        .map(|&z| wright::eval(&spec, Complex64::new(z, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    match a.output.format {
        Format::Csv => {
            let mut s = String::from("z,re,im\n");
            for (z, v) in zs.iter().zip(&values) {
                let _ = writeln!(s, "{z},{},{}", v.re, v.im);
            }
            Ok(s)
        }
        Format::Json => to_json(
            &zs.iter()
                .zip(&values)
                .map(|(z, v)| (z, [v.re, v.im]))
                .collect::<Vec<_>>(),
        ),
    }
}

fn real_table(zs: &[f64], values: &[f64], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut s = String::from("z,value\n");
            for (z, v) in zs.iter().zip(values) {
                let _ = writeln!(s, "{z},{v}");
            }
            Ok(s)
        }
        Format::Json => to_json(&zs.iter().zip(values).collect::<Vec<_>>()),
    }
}

fn eval_foxh(a: &SpecEvalArgs) -> Result<String> {
    let spec: HFunctionSpec = parse_json(&read_input(&a.input)?, "H-function spec")?;
    let zs = parse_points(&a.z, a.log_grid)?;
    let values = fox_h::eval_many(&spec, &zs).into_iter().collect::<Result<Vec<_>>>()?;
    real_table(&zs, &values, a.output.format)
}

fn eval_ml(a: &MlArgs) -> Result<String> {
    let zs = parse_points(&a.z, a.log_grid)?;
    let values = zs
        .par_iter()
        .map(|&z| wright::mittag_leffler(a.alpha, a.beta, Complex64::new(z, 0.0)).map(|v| v.re))
        .collect::<Result<Vec<_>>>()?;
    real_table(&zs, &values, a.output.format)
}

#[derive(Serialize)]
struct OdeDescriptor<'a> {
    kind: &'static str,
    roots: &'a [Complex64],
    solution: &'a OdeSolution,
}

fn ode_descriptor(sol: &OdeSolution) -> OdeDescriptor<'_> {
    let kind = match sol.branch {
        solver_ode::OdeBranch::SmallAlpha { .. } => "small_alpha",
        solver_ode::OdeBranch::LargeAlpha { .. } => "large_alpha",
    };
    OdeDescriptor {
        kind,
        roots: &sol.roots,
        solution: sol,
    }
}

fn solve_ode(a: &SolveOdeArgs) -> Result<String> {
    let problem: OdeProblem = parse_json(&read_input(&a.input)?, "ODE problem")?;
    let sol = solver_ode::solve(&problem)?;
    let Some(z) = &a.z else {
        return to_json(&ode_descriptor(&sol));
    };
    let zs = parse_points(z, a.log_grid)?;
    let values = zs.par_iter().map(|&z| sol.evaluate(z)).collect::<Result<Vec<_>>>()?;
    match a.output.format {
        Format::Csv => {
            let complex = !all_real(&values);
            let mut s = format!("z,{}\n", value_header("y", complex));
            for (z, v) in zs.iter().zip(&values) {
                let mut line = z.to_string();
                push_value(&mut line, *v, complex);
                s.push_str(&line);
                s.push('\n');
            }
            Ok(s)
        }
        Format::Json => to_json(&serde_json::json!({
            "descriptor": ode_descriptor(&sol),
            "samples": zs.iter().zip(&values).map(|(z, v)| serde_json::json!({"z": z, "y": v})).collect::<Vec<_>>(),
        })),
    }
}

/// The solution the CLI builds for a PDE problem: the closed form when
/// `alpha = 1`, `d != 2` and the discriminant is non-negative, unless disabled.
pub fn choose_pde_solution(problem: &DiffusionProblem, choice: &PdeChoice) -> Result<PdeSolution> {
    problem.validate()?;
    if problem.is_d2() {
        let variant = match choice.d2_variant {
            D2VariantArg::Derivation => D2Variant::Derivation,
            D2VariantArg::Statement => D2Variant::Statement,
        };
        return solver_pde::solve_d2(problem, variant);
    }
    if !choice.no_closed_form && problem.alpha == 1.0 && problem.discriminant() >= 0.0 {
        let branch = match choice.branch {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        };
        return solver_pde::corollary_alpha1(problem, branch);
    }
    solver_pde::solve(problem)
}

#[derive(Serialize)]
struct PdeDescriptor<'a> {
    kind: &'static str,
    s1: Option<Complex64>,
    s2: Option<Complex64>,
    #[serde(rename = "K")]
    k: f64,
    solution: &'a PdeSolution,
}

fn pde_descriptor(sol: &PdeSolution) -> PdeDescriptor<'_> {
    PdeDescriptor {
        kind: sol.kind(),
        s1: sol.s_roots.map(|s| s[0]),
        s2: sol.s_roots.map(|s| s[1]),
        k: sol.k,
        solution: sol,
    }
}

fn solve_pde(a: &SolvePdeArgs) -> Result<String> {
    let problem: DiffusionProblem = parse_json(&read_input(&a.input)?, "PDE problem")?;
    let sol = choose_pde_solution(&problem, &a.choice)?;
    let Some(grid) = &a.grid else {
        return to_json(&pde_descriptor(&sol));
    };
    let grid = pde_grid(grid, a.log_grid)?;
    let values = grid
        .par_iter()
        .map(|&(x, t)| sol.evaluate(x, t))
        .collect::<Result<Vec<_>>>()?;
    match a.output.format {
        Format::Csv => {
            let complex = !all_real(&values);
            let mut s = format!("x,t,{}\n", value_header("u", complex));
            for ((x, t), v) in grid.iter().zip(&values) {
                let mut line = format!("{x},{t}");
                push_value(&mut line, *v, complex);
                s.push_str(&line);
                s.push('\n');
            }
            Ok(s)
        }
        Format::Json => to_json(&serde_json::json!({
            "descriptor": pde_descriptor(&sol),
            "samples": grid
                .iter()
                .zip(&values)
                .map(|((x, t), v)| serde_json::json!({"x": x, "t": t, "u": v}))
                .collect::<Vec<_>>(),
        })),
    }
}

fn default_tol(report: &ResidualReport) -> f64 {
    match report.method {
        verify::Method::GrunwaldLetnikov => 1e-3,
        _ => 1e-8,
    }
}

fn verdict_line(label: &str, report: &ResidualReport, tol: f64) -> (bool, String) {
    let pass = report.passes(tol);
    let word = if pass { "PASS" } else { "FAIL" };
    (
        pass,
        format!("{word} {label}: max_rel_err = {:e} (tol {tol:e})", report.max_rel_err),
    )
}

fn run_verify(a: &VerifyArgs) -> Result<Outcome> {
    let text = read_input(&a.input)?;
    let raw: Value = parse_json(&text, "problem")?;
    let is_ode = raw.get("a_coeffs").is_some();
    let (label, report) = if is_ode {
        let problem: OdeProblem = parse_json(&text, "ODE problem")?;
        let sol = solver_ode::solve(&problem)?;
        let zs = ode_grid(a.grid.as_deref().unwrap_or(DEFAULT_ODE_GRID), a.log_grid)?;
        ("ode", verify::residual_ode(&sol, &zs, a.h)?)
    } else {
        let problem: DiffusionProblem = parse_json(&text, "PDE problem")?;
        let sol = choose_pde_solution(&problem, &a.choice)?;
        let grid = pde_grid(a.grid.as_deref().unwrap_or(DEFAULT_PDE_GRID), a.log_grid)?;
        (sol.kind(), verify::residual_pde(&sol, &grid, a.h)?)
    };
    let tol = a.tol.unwrap_or_else(|| default_tol(&report));
    check_tol(tol)?;
    Ok(Outcome {
        body: emit_report(&report, a.format, tol),
        verdict: Some(verdict_line(label, &report, tol)),
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("--tol must be positive, got {tol}")))
    }
}

fn run_identities(a: &IdentitiesArgs) -> Result<Outcome> {
    let (label, report, default) = match a.suite {
        Suite::Lemma1 => ("lemma1", verify::lemma1_suite(a.n.unwrap_or(1000), a.seed)?, 1e-11),
        Suite::HTransforms => ("h-transforms", verify::h_transform_suite()?, 1e-6),
        Suite::Reduction => ("reduction", verify::reduction_suite(a.n.unwrap_or(200), a.seed)?, 1e-10),
        Suite::WrightReductions => ("wright-reductions", verify::wright_reduction_suite()?, 1e-10),
    };
    let tol = a.tol.unwrap_or(default);
    check_tol(tol)?;
    Ok(Outcome {
        body: emit_report(&report, a.format, tol),
        verdict: Some(verdict_line(label, &report, tol)),
    })
}

#[derive(Serialize)]
struct ReportJson<'a> {
    #[serde(flatten)]
    report: &'a ResidualReport,
    tol: f64,
    pass: bool,
}

/// Serializes a report. CSV has header `x,t,lhs,rhs,abs_err,rel_err`, with
/// `lhs` and `rhs` split into `_re,_im` columns when any value is complex.
pub fn emit_report(report: &ResidualReport, format: Format, tol: f64) -> String {
    match format {
        Format::Json => {
            let doc = ReportJson {
                report,
                tol,
                pass: report.passes(tol),
            };
            // a report holds only numbers and plain enums
            serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
        }
        Format::Csv => {
            let values: Vec<Complex64> = report.points.iter().flat_map(|p| [p.lhs, p.rhs]).collect();
            let complex = !all_real(&values);
            let mut s = format!(
                "x,t,{},{},abs_err,rel_err\n",
                value_header("lhs", complex),
                value_header("rhs", complex)
            );
            for p in &report.points {
                let mut line = p.x.to_string();
                line.push(',');
                if let Some(t) = p.t {
                    line.push_str(&t.to_string());
                }
                push_value(&mut line, p.lhs, complex);
                push_value(&mut line, p.rhs, complex);
                let _ = write!(line, ",{},{}", p.abs_err, p.rel_err);
                s.push_str(&line);
                s.push('\n');
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Method;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("fracsol").chain(args.iter().copied())).unwrap()
    }

    fn sample_report() -> ResidualReport {
        ResidualReport::from_samples(
            Method::GrunwaldLetnikov,
            vec![
                (
                    0.5,
                    Some(1.0),
                    Complex64::new(1.25, 0.0),
                    Complex64::new(1.2500001, 0.0),
                ),
                (
                    1.0,
                    Some(2.0),
                    Complex64::new(-3.0e-7, 0.0),
                    Complex64::new(-3.1e-7, 0.0),
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_range("0.5:2:4", false).unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_range("3:9:1", false).unwrap(), vec![3.0]);
        let g = parse_range("1:100:3", true).unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12 && g[2] == 100.0);
        assert!(parse_range("1:2:0", false).is_err());
        assert!(parse_range("-1:2:3", true).is_err());
        assert!(parse_range("1:2", false).is_err());
    }

    #[test]
    fn points_mix_values_and_ranges() {
        assert_eq!(parse_points("-1,0:1:3", false).unwrap(), vec![-1.0, 0.0, 0.5, 1.0]);
        assert!(parse_points("a", false).is_err());
    }

    #[test]
    fn grid_is_x_major() {
        let g = pde_grid("x=1:2:2,t=3:4:2", false).unwrap();
        assert_eq!(g, vec![(1.0, 3.0), (1.0, 4.0), (2.0, 3.0), (2.0, 4.0)]);
        assert!(pde_grid("x=1:2:2", false).is_err());
        assert!(pde_grid("x=1:2:2,t=0:1:2", false).is_err());
        assert!(pde_grid("x=1:2:2,t=1:2:2,y=1:2:2", false).is_err());
    }

    #[test]
    fn heat_kernel_csv() {
        let cli = parse(&[
            "solve",
            "pde",
            "--json",
            r#"{"alpha":1,"m":0,"d":0,"A":1,"B":0,"C":0,"a":0}"#,
            "--grid",
            "x=0.5:2:4,t=0.5:2:4",
        ]);
        let out = run(&cli.command).unwrap();
        let lines: Vec<&str> = out.body.lines().collect();
        assert_eq!(lines[0], "x,t,u");
        assert_eq!(lines.len(), 17);
        let row = lines.iter().find(|l| l.starts_with("1,1,")).unwrap();
        let u: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((u - 0.7788008).abs() < 1e-7);
    }

    #[test]
    fn ml_at_zero_is_one() {
        let out = run(&parse(&["eval", "ml", "--alpha", "1", "--beta", "1", "--z", "0"]).command).unwrap();
        assert_eq!(out.body, "z,value\n0,1\n");
    }

    #[test]
    fn lemma1_suite_passes() {
        let out = run(&parse(&[
            "identities",
            "--suite",
            "lemma1",
            "--n",
            "1000",
            "--seed",
            "7",
            "--tol",
            "1e-11",
        ])
        .command)
        .unwrap();
        assert!(out.verdict.unwrap().0);
    }

    #[test]
    fn report_json_round_trips() {
        let r = sample_report();
        let text = emit_report(&r, Format::Json, 0.1);
        let back: ResidualReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["pass"], Value::Bool(true));
        assert_eq!(v["method"], "grunwald_letnikov");
    }

    #[test]
    fn report_csv_shape() {
        let text = emit_report(&sample_report(), Format::Csv, 1e-3);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,t,lhs,rhs,abs_err,rel_err");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.5,1,1.25,1.2500001,"));
        let single = ResidualReport::from_samples(
            Method::TermwiseExact,
            vec![(2.0, None, Complex64::new(1.0, 1.0), Complex64::new(1.0, 1.0))],
        )
        .unwrap();
        let text = emit_report(&single, Format::Csv, 1e-3);
        assert_eq!(
            text,
            "x,t,lhs_re,lhs_im,rhs_re,rhs_im,abs_err,rel_err\n2,,1,1,1,1,0,0\n"
        );
    }

    #[test]
    fn verify_detects_problem_kind() {
        let cli = parse(&["verify", "--json", r#"{"alpha":2.5,"m":1,"a_coeffs":[0.1,0.5,1]}"#]);
        let out = run(&cli.command).unwrap();
        assert!(out.verdict.unwrap().0);
        let cli = parse(&["verify", "--json", r#"{"alpha":1,"m":0,"d":0,"A":1,"B":0,"C":0,"a":0}"#]);
        let out = run(&cli.command).unwrap();
        let (pass, line) = out.verdict.unwrap();
        assert!(pass && line.starts_with("PASS closed_form_exp"));
    }

    #[test]
    fn malformed_input_is_an_input_error() {
        let cli = parse(&["solve", "pde", "--json", r#"{"alpha":1}"#]);
        assert!(matches!(run(&cli.command), Err(Error::Input(_))));
        assert!(Cli::try_parse_from(["fracsol", "eval", "ml", "--alpha", "1", "--z", "0", "--bogus"]).is_err());
    }

    #[test]
    fn same_seed_same_output() {
        let cli = parse(&["identities", "--suite", "reduction", "--n", "20", "--seed", "3"]);
        assert_eq!(run(&cli.command).unwrap(), run(&cli.command).unwrap());
    }
}
