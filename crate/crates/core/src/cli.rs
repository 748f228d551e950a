//! Command-line front end.
//!
//! [`run`] parses arguments, executes one command and returns the exit code
//! together with everything that would be written to stdout and stderr, so
//! the binary is a thin wrapper and every command can be exercised
//! in-process.
//!
//! Exit codes: 0 success (or related, for `order`), 1 usage error, 2 mean
//! outside `[a_1, a_n]`, 3 non-convergence or truncated chain, 4 unrelated
//! states, 5 oracle gaps outside their bounds.
//!
//! JSON output is a single-line envelope
//! `{schema_version, command, inputs, result, diagnostics}`; floating-point
//! numbers carry 17 significant digits and infinite multipliers are the
//! strings `"inf"` / `"-inf"`.

use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::io;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

use crate::batch::{entropy_margin, Execution};
use crate::equilibrium::{equilibrium_state, EquilibriumResult};
use crate::error::Error;
use crate::lagrange::{maxent_state, solve, MaxEntProblem, Method, SolveTrace, SolverConfig, Termination};
use crate::oracle::{constrained_sampler, oracle_maxent_grid, GridSpec};
use crate::order::{leq_projective, leq_symmetric, phi_chain, CHAIN_TOLERANCE};
use crate::state::{entropy, ClassicalState, Observable};

pub const SCHEMA_VERSION: &str = "1.0";

/// Overrides the default residual tolerance; `--tol` overrides this.
pub const ENV_DEFAULT_TOL: &str = "MAXENT_DEFAULT_TOL";

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NO_SOLUTION: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
    pub const UNRELATED: i32 = 4;
    pub const ORACLE_GAP: i32 = 5;
}

/// Slack allowed when checking that the solver beats the oracle in entropy.
pub const ENTROPY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "maxent", version, about = "Maximum entropy states under a mean constraint")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximum entropy state for an observable and a target mean.
    Solve(SolveArgs),
    /// Boltzmann state e^{-a_i}/Za and its free energy.
    Equilibrium(EquilibriumArgs),
    /// Decide x ⊑ y in the Bayesian order.
    Order(OrderArgs),
    /// Iterate the fixed-point map from the uniform state.
    PhiChain(ChainArgs),
    /// Compare the solver with a brute-force grid search and random feasible states.
    OracleCompare(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OrderMethod {
    Symmetric,
    Projective,
}

#[derive(Clone, Debug)]
struct List(Vec<f64>);

fn parse_list(s: &str) -> Result<List, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("{t:?} is not a number"))
        })
        .collect::<Result<_, _>>()
        .map(List)
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Strictly increasing outcome values, comma separated.
    #[arg(long, value_name = "V1,V2,...", value_parser = parse_list, allow_hyphen_values = true)]
    obs: List,
    /// Target mean E.
    #[arg(long, allow_hyphen_values = true)]
    mean: f64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Residual tolerance (default 1e-12, or $MAXENT_DEFAULT_TOL).
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    #[arg(long = "step-tol", allow_hyphen_values = true)]
    step_tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// fixed-point, bisection or newton.
    #[arg(long, value_parser = parse_method, default_value = "fixed-point")]
    method: Method,
    /// Initial guess for the multiplier.
    #[arg(long, allow_hyphen_values = true)]
    guess: Option<f64>,
    /// Emit every iterate.
    #[arg(long)]
    trace: bool,
    /// Report wall-clock time in the diagnostics.
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct EquilibriumArgs {
    #[arg(long, value_name = "V1,V2,...", value_parser = parse_list, allow_hyphen_values = true)]
    obs: List,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct OrderArgs {
    #[arg(long, value_name = "P1,P2,...", value_parser = parse_list)]
    x: List,
    #[arg(long, value_name = "Q1,Q2,...", value_parser = parse_list)]
    y: List,
    #[arg(long, value_enum, default_value_t = OrderMethod::Symmetric)]
    method: OrderMethod,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct ChainArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Maximum number of applications of the map.
    #[arg(long, default_value_t = 1_000_000)]
    steps: usize,
    /// Max-norm distance between successive states that ends the chain.
    #[arg(long, default_value_t = CHAIN_TOLERANCE, allow_hyphen_values = true)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Grid points per simplex edge.
    #[arg(long, default_value_t = GridSpec::DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Seed for the constrained sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random feasible states compared against the solver.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

struct Failure {
    code: i32,
    message: String,
    stdout: String,
}

impl Failure {
    fn usage(flag: &str, msg: impl fmt::Display) -> Self {
        Self {
            code: exit::USAGE,
            message: format!("invalid value for {flag}: {msg}"),
            stdout: String::new(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoSolution { .. } => exit::NO_SOLUTION,
            Error::NonConvergence { .. } => exit::NON_CONVERGENCE,
            _ => exit::USAGE,
        };
        Self {
            code,
            message: e.to_string(),
            stdout: String::new(),
        }
    }
}

/// Successful command output: exit code and stdout.
type Emitted = (i32, String);

/// Runs one command line. `env_tol` is the value of [`ENV_DEFAULT_TOL`], if set.
pub fn run<I, T>(args: I, env_tol: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a, env_tol),
        Command::Equilibrium(a) => cmd_equilibrium(a),
        Command::Order(a) => cmd_order(a),
        Command::PhiChain(a) => cmd_phi_chain(a),
        Command::OracleCompare(a) => cmd_oracle_compare(a, env_tol),
    };
    match result {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(f) => Outcome {
            code: f.code,
            stdout: f.stdout,
            stderr: format!("error: {}\n", f.message),
        },
    }
}

fn problem_from(args: &ProblemArgs) -> Result<MaxEntProblem, Failure> {
    let a = Observable::new(args.obs.0.clone()).map_err(|e| Failure::usage("--obs", e))?;
    if !args.mean.is_finite() {
        return Err(Failure::usage("--mean", "must be finite"));
    }
    MaxEntProblem::new(a, args.mean).map_err(Failure::from)
}

fn default_tol(env_tol: Option<&str>) -> Result<f64, Failure> {
    match env_tol {
        None => Ok(SolverConfig::default().residual_tol),
        Some(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| *t > 0.0 && t.is_finite())
            .ok_or_else(|| Failure::usage(ENV_DEFAULT_TOL, format!("{s:?} is not a positive number"))),
    }
}

/// A real number that may be infinite; serialized as a JSON number when
/// finite and as `"inf"`, `"-inf"` or `"nan"` otherwise.
#[derive(Debug, Clone, Copy)]
struct ExtReal(f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&num(self.0))
        }
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Compact JSON with every float written to 17 significant digits.
struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(num(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

#[derive(Serialize)]
struct Envelope<'a, I: Serialize, R: Serialize, D: Serialize> {
    schema_version: &'static str,
    command: &'a str,
    inputs: I,
    result: R,
    diagnostics: Option<D>,
}

fn to_json<I: Serialize, R: Serialize, D: Serialize>(
    command: &str,
    inputs: I,
    result: R,
    diagnostics: Option<D>,
) -> String {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        inputs,
        result,
        diagnostics,
    };
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
    env.serialize(&mut ser).expect("in-memory serialization");
    let mut s = String::from_utf8(buf).expect("serde_json writes UTF-8");
    s.push('\n');
    s
}

fn csv_header(out: &mut String, lead: &[&str], n: usize, prefix: &str, trail: &[&str]) {
    let mut cols: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    cols.extend((1..=n).map(|i| format!("{prefix}{i}")));
    cols.extend(trail.iter().map(|s| s.to_string()));
    out.push_str(&cols.join(","));
    out.push('\n');
}

fn join_nums(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",")
}

fn plain_state(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.10}")).collect::<Vec<_>>().join(", ")
}

// ---------------------------------------------------------------------------
// solve

#[derive(Serialize)]
struct SolveInputs<'a> {
    obs: &'a [f64],
    mean: f64,
    tol: f64,
    step_tol: f64,
    max_iter: usize,
    method: Method,
    guess: f64,
    trace: bool,
}

#[derive(Serialize)]
struct SolvePayload {
    converged: bool,
    lambda: Option<ExtReal>,
    state: Option<Vec<f64>>,
    iterations: usize,
    residual: f64,
    termination: Termination,
}

#[derive(Serialize)]
struct TraceRow {
    k: usize,
    lambda: f64,
    residual: f64,
}

#[derive(Serialize)]
struct SolveDiagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TraceRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_seconds: Option<f64>,
}

fn cmd_solve(args: SolveArgs, env_tol: Option<&str>) -> Result<Emitted, Failure> {
    let started = Instant::now();
    let p = problem_from(&args.problem)?;
    let defaults = SolverConfig::default();
    let tol = match args.tol {
        Some(t) => t,
        None => default_tol(env_tol)?,
    };
    let cfg = SolverConfig {
        residual_tol: tol,
        step_tol: args.step_tol.unwrap_or(defaults.step_tol),
        max_iter: args.max_iter.unwrap_or(defaults.max_iter),
        method: args.method,
        initial_guess: args.guess.unwrap_or(defaults.initial_guess),
        record_trace: args.trace,
    };
    cfg.validate().map_err(|e| {
        let flag = match e.to_string() {
            s if s.contains("residual") => "--tol",
            s if s.contains("step") => "--step-tol",
            s if s.contains("max_iter") => "--max-iter",
            _ => "--guess",
        };
        Failure::usage(flag, e)
    })?;

    let (payload, trace, failure) = match solve(&p, &cfg) {
        Ok(r) => (
            SolvePayload {
                converged: true,
                lambda: Some(ExtReal(r.lambda)),
                state: Some(r.state.probs().to_vec()),
                iterations: r.iterations,
                residual: r.residual,
                termination: r.termination,
            },
            r.trace,
            None,
        ),
        Err(Error::NonConvergence {
            iterations,
            residual,
            trace,
        }) => {
            let message = format!("no convergence after {iterations} iterations (last residual {residual:e})");
            (
                SolvePayload {
                    converged: false,
                    lambda: None,
                    state: None,
                    iterations,
                    residual,
                    termination: trace.termination,
                },
                Some(*trace),
                Some(message),
            )
        }
        Err(e) => return Err(e.into()),
    };

    let elapsed = args.timing.then(|| started.elapsed().as_secs_f64());
    let stdout = match args.format {
        Format::Json => {
            let inputs = SolveInputs {
                obs: p.observable().values(),
                mean: p.target_mean(),
                tol: cfg.residual_tol,
                step_tol: cfg.step_tol,
                max_iter: cfg.max_iter,
                method: cfg.method,
                guess: cfg.initial_guess,
                trace: cfg.record_trace,
            };
            let rows = if args.trace { trace.as_ref().map(trace_rows) } else { None };
            let diagnostics = (rows.is_some() || elapsed.is_some()).then_some(SolveDiagnostics {
                trace: rows,
                elapsed_seconds: elapsed,
            });
            to_json("solve", inputs, &payload, diagnostics)
        }
        Format::Csv => solve_csv(&p, &payload, trace.as_ref(), args.trace),
        Format::Plain => solve_plain(&p, &cfg, &payload, elapsed),
    };
    match failure {
        None => Ok((exit::SUCCESS, stdout)),
        Some(message) => Err(Failure {
            code: exit::NON_CONVERGENCE,
            message,
            stdout,
        }),
    }
}

fn trace_rows(t: &SolveTrace) -> Vec<TraceRow> {
    t.entries
        .iter()
        .map(|e| TraceRow {
            k: e.k,
            lambda: e.lambda,
            residual: e.residual,
        })
        .collect()
}

fn solve_csv(p: &MaxEntProblem, payload: &SolvePayload, trace: Option<&SolveTrace>, full: bool) -> String {
    let mut out = String::new();
    csv_header(&mut out, &["step", "lambda", "residual"], p.len(), "p", &["status"]);
    let status = payload.termination.as_str();
    let entries = trace.map(|t| t.entries.as_slice()).unwrap_or(&[]);
    if full && !entries.is_empty() {
        for (i, e) in entries.iter().enumerate() {
            let last = i + 1 == entries.len();
            let state = maxent_state(p, e.lambda);
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                e.k,
                num(e.lambda),
                num(e.residual),
                join_nums(state.probs()),
                if last { status } else { "" }
            );
        }
    } else if let (Some(lambda), Some(state)) = (payload.lambda, payload.state.as_ref()) {
        let step = payload.iterations.saturating_sub(1);
        let _ = writeln!(
            out,
            "{step},{},{},{},{status}",
            num(lambda.0),
            num(payload.residual),
            join_nums(state)
        );
    } else if let Some(e) = entries.last() {
        let state = maxent_state(p, e.lambda);
        let _ = writeln!(
            out,
            "{},{},{},{},{status}",
            e.k,
            num(e.lambda),
            num(e.residual),
            join_nums(state.probs())
        );
    }
    out
}

fn solve_plain(p: &MaxEntProblem, cfg: &SolverConfig, payload: &SolvePayload, elapsed: Option<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "observable  {:?}", p.observable().values());
    let _ = writeln!(out, "mean        {}", p.target_mean());
    let _ = writeln!(out, "method      {}", cfg.method);
    match (payload.lambda, payload.state.as_ref()) {
        (Some(l), Some(s)) => {
            let _ = writeln!(out, "lambda      {}", if l.0.is_finite() { format!("{}", l.0) } else { num(l.0) });
            let _ = writeln!(out, "state       [{}]", plain_state(s));
        }
        _ => {
            let _ = writeln!(out, "lambda      (not converged)");
        }
    }
    let _ = writeln!(out, "iterations  {}", payload.iterations);
    let _ = writeln!(out, "residual    {:e}", payload.residual);
    let _ = writeln!(out, "termination {}", payload.termination.as_str());
    if let Some(t) = elapsed {
        let _ = writeln!(out, "elapsed     {t:.6} s");
    }
    out
}

// ---------------------------------------------------------------------------
// equilibrium

/// Tolerance for `⟨a|y⟩ − σy = −log Za`, checked before anything is emitted.
const FUNCTIONAL_TOLERANCE: f64 = 1e-10;

#[derive(Serialize)]
struct ObsInputs<'a> {
    obs: &'a [f64],
}

fn cmd_equilibrium(args: EquilibriumArgs) -> Result<Emitted, Failure> {
    let a = Observable::new(args.obs.0).map_err(|e| Failure::usage("--obs", e))?;
    let r: EquilibriumResult = equilibrium_state(&a);
    let gap = (r.functional_value + r.log_partition).abs();
    if gap > FUNCTIONAL_TOLERANCE {
        return Err(Failure {
            code: exit::USAGE,
            message: format!("free energy differs from -log Za by {gap:e}"),
            stdout: String::new(),
        });
    }
    let stdout = match args.format {
        Format::Json => to_json("equilibrium", ObsInputs { obs: a.values() }, &r, None::<()>),
        Format::Csv => {
            let mut out = String::new();
            csv_header(&mut out, &["log_partition", "functional_value"], a.len(), "p", &[]);
            let _ = writeln!(
                out,
                "{},{},{}",
                num(r.log_partition),
                num(r.functional_value),
                join_nums(r.state.probs())
            );
            out
        }
        Format::Plain => format!(
            "state            [{}]\nlog_partition    {}\nfunctional_value {}\n",
            plain_state(r.state.probs()),
            r.log_partition,
            r.functional_value
        ),
    };
    Ok((exit::SUCCESS, stdout))
}

// ---------------------------------------------------------------------------
// order

#[derive(Serialize)]
struct OrderInputs<'a> {
    x: &'a [f64],
    y: &'a [f64],
    method: &'static str,
}

#[derive(Serialize)]
struct OrderPayload {
    related: bool,
    /// One-based positions.
    witness_permutation: Option<Vec<usize>>,
}

fn cmd_order(args: OrderArgs) -> Result<Emitted, Failure> {
    let x = ClassicalState::new(args.x.0).map_err(|e| Failure::usage("--x", e))?;
    let y = ClassicalState::new(args.y.0).map_err(|e| Failure::usage("--y", e))?;
    let (method, payload) = match args.method {
        OrderMethod::Symmetric => {
            let v = leq_symmetric(&x, &y)?;
            let witness = v
                .witness_permutation
                .map(|s| s.into_iter().map(|i| i + 1).collect());
            ("symmetric", OrderPayload { related: v.related, witness_permutation: witness })
        }
        OrderMethod::Projective => {
            let related = leq_projective(&x, &y)?;
            ("projective", OrderPayload { related, witness_permutation: None })
        }
    };
    let stdout = match args.format {
        Format::Json => to_json(
            "order",
            OrderInputs { x: x.probs(), y: y.probs(), method },
            &payload,
            None::<()>,
        ),
        Format::Csv => format!(
            "related,method,witness\n{},{method},{}\n",
            payload.related,
            witness_text(&payload.witness_permutation)
        ),
        Format::Plain => format!(
            "x {} y: {}\nwitness: {}\n",
            if payload.related { "⊑" } else { "⋢" },
            payload.related,
            match &payload.witness_permutation {
                Some(_) => witness_text(&payload.witness_permutation),
                None => "none".into(),
            }
        ),
    };
    let code = if payload.related { exit::SUCCESS } else { exit::UNRELATED };
    Ok((code, stdout))
}

fn witness_text(w: &Option<Vec<usize>>) -> String {
    w.as_ref()
        .map(|s| s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "))
        .unwrap_or_default()
}

// ---------------------------------------------------------------------------
// phi-chain

#[derive(Serialize)]
struct ChainInputs<'a> {
    obs: &'a [f64],
    mean: f64,
    steps: usize,
    tol: f64,
}

#[derive(Serialize)]
struct ChainRow<'a> {
    step: usize,
    lambda: ExtReal,
    residual: f64,
    state: &'a [f64],
}

#[derive(Serialize)]
struct ChainPayload<'a> {
    converged: bool,
    length: usize,
    rows: Vec<ChainRow<'a>>,
}

fn cmd_phi_chain(args: ChainArgs) -> Result<Emitted, Failure> {
    let p = problem_from(&args.problem)?;
    if args.steps == 0 {
        return Err(Failure::usage("--steps", "must be at least 1"));
    }
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(Failure::usage("--tol", "must be positive"));
    }
    let chain = phi_chain(&p, args.steps, args.tol)?;
    let residuals = chain.residuals(&p);
    let status = if chain.converged { "converged" } else { "truncated" };
    let stdout = match args.format {
        Format::Json => {
            let rows = chain
                .states
                .iter()
                .zip(&chain.lambdas)
                .zip(&residuals)
                .enumerate()
                .map(|(step, ((s, &l), &r))| ChainRow {
                    step,
                    lambda: ExtReal(l),
                    residual: r,
                    state: s.probs(),
                })
                .collect();
            to_json(
                "phi-chain",
                ChainInputs {
                    obs: p.observable().values(),
                    mean: p.target_mean(),
                    steps: args.steps,
                    tol: args.tol,
                },
                ChainPayload {
                    converged: chain.converged,
                    length: chain.len(),
                    rows,
                },
                None::<()>,
            )
        }
        Format::Csv => {
            let mut out = String::new();
            csv_header(&mut out, &["step", "lambda", "residual"], p.len(), "p", &["status"]);
            for (k, s) in chain.states.iter().enumerate() {
                let last = k + 1 == chain.len();
                let _ = writeln!(
                    out,
                    "{k},{},{},{},{}",
                    num(chain.lambdas[k]),
                    num(residuals[k]),
                    join_nums(s.probs()),
                    if last { status } else { "" }
                );
            }
            out
        }
        Format::Plain => {
            let mut out = String::new();
            let _ = writeln!(out, "{} after {} states", status, chain.len());
            let _ = writeln!(out, "lambda      {}", chain.lambdas.last().copied().unwrap_or(0.0));
            let _ = writeln!(out, "state       [{}]", plain_state(chain.terminal().probs()));
            out
        }
    };
    if chain.converged {
        Ok((exit::SUCCESS, stdout))
    } else {
        Err(Failure {
            code: exit::NON_CONVERGENCE,
            message: format!("chain truncated after {} steps", args.steps),
            stdout,
        })
    }
}

// ---------------------------------------------------------------------------
// oracle-compare

#[derive(Serialize)]
struct OracleInputs<'a> {
    obs: &'a [f64],
    mean: f64,
    resolution: usize,
    seed: u64,
    samples: usize,
}

#[derive(Serialize)]
struct OraclePayload<'a> {
    solver_state: &'a [f64],
    oracle_state: &'a [f64],
    max_norm_gap: f64,
    max_norm_bound: f64,
    /// `σ(solver) − σ(oracle)`.
    entropy_gap: f64,
    /// `min σ(solver) − σ(x)` over the random feasible states.
    sampler_margin: f64,
    entropy_slack: f64,
    within_bounds: bool,
}

/// Max-norm distance allowed between the solver and the grid optimum: two
/// grid spacings.
pub fn oracle_gap_bound(resolution: usize) -> f64 {
    2.0 / resolution as f64
}

fn cmd_oracle_compare(args: OracleArgs, env_tol: Option<&str>) -> Result<Emitted, Failure> {
    let p = problem_from(&args.problem)?;
    let grid = GridSpec::new(args.resolution, p.len()).map_err(|e| match e {
        Error::SizeLimit { .. } => Failure::usage("--obs", e),
        _ => Failure::usage("--resolution", e),
    })?;
    if !p.is_interior() {
        return Err(Failure::usage("--mean", "the oracle needs a mean strictly between a_1 and a_n"));
    }
    if args.samples == 0 {
        return Err(Failure::usage("--samples", "must be at least 1"));
    }
    let cfg = SolverConfig::default().with_residual_tol(default_tol(env_tol)?);
    let solved = solve(&p, &cfg)?;
    let oracle = oracle_maxent_grid(&p, &grid, Execution::default())?;
    let samples = constrained_sampler(&p, args.samples, args.seed)?;
    let max_norm_gap = solved.state.max_distance(&oracle)?;
    let entropy_gap = entropy(&solved.state) - entropy(&oracle);
    let sampler_margin = entropy_margin(&solved.state, &samples, Execution::default());
    let bound = oracle_gap_bound(args.resolution);
    let within = max_norm_gap <= bound && entropy_gap >= -ENTROPY_SLACK && sampler_margin >= -ENTROPY_SLACK;
    let payload = OraclePayload {
        solver_state: solved.state.probs(),
        oracle_state: oracle.probs(),
        max_norm_gap,
        max_norm_bound: bound,
        entropy_gap,
        sampler_margin,
        entropy_slack: ENTROPY_SLACK,
        within_bounds: within,
    };
    let stdout = match args.format {
        Format::Json => to_json(
            "oracle-compare",
            OracleInputs {
                obs: p.observable().values(),
                mean: p.target_mean(),
                resolution: args.resolution,
                seed: args.seed,
                samples: args.samples,
            },
            &payload,
            None::<()>,
        ),
        Format::Csv => {
            let mut out = String::new();
            let n = p.len();
            let mut cols: Vec<String> = ["max_norm_gap", "entropy_gap", "sampler_margin", "within_bounds"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            cols.extend((1..=n).map(|i| format!("solver_p{i}")));
            cols.extend((1..=n).map(|i| format!("oracle_p{i}")));
            out.push_str(&cols.join(","));
            out.push('\n');
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                num(max_norm_gap),
                num(entropy_gap),
                num(sampler_margin),
                within,
                join_nums(solved.state.probs()),
                join_nums(oracle.probs())
            );
            out
        }
        Format::Plain => format!(
            "solver state   [{}]\noracle state   [{}]\nmax-norm gap   {:e} (bound {:e})\nentropy gap    {:e}\nsampler margin {:e}\nwithin bounds  {}\n",
            plain_state(solved.state.probs()),
            plain_state(oracle.probs()),
            max_norm_gap,
            bound,
            entropy_gap,
            sampler_margin,
            within
        ),
    };
    let code = if within { exit::SUCCESS } else { exit::ORACLE_GAP };
    Ok((code, stdout))
}
