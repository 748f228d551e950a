//! The Lagrange multiplier of the maximum entropy problem.
//!
//! For an observable `a` and a target mean `E` with `a_1 < E < a_n`, the
//! maximum entropy state is `y_i = e^{λ a_i} / Σ_j e^{λ a_j}` where `λ` is
//! the unique root of
//!
//! ```text
//! f(x) = Σ a_i e^{x a_i} / Σ e^{x a_i} − E.
//! ```
//!
//! `f` is strictly increasing with `0 < f′(x) < (a_n − a_1)²`, so the damped
//! map `I_f(x) = x − f(x) / (a_n − a_1)²` has derivative in `(0, 1)` and its
//! iterates converge monotonically to `λ` from every starting point. That map
//! is the default solver. Bisection is offered as a bracketing alternative
//! and Newton's method as an experimental comparator with no convergence
//! guarantee.
//!
//! At `E = a_1` (resp. `E = a_n`) no finite multiplier exists; the maximum
//! entropy state is `e_1` (resp. `e_n`) and the multiplier is reported as
//! `−∞` (resp. `+∞`).

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics;
use crate::state::{ClassicalState, Observable};

/// An observable paired with a target mean `E ∈ [a_1, a_n]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEntProblem {
    observable: Observable,
    target_mean: f64,
}

/// Which end of `[a_1, a_n]` a boundary problem sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Lower,
    Upper,
}

impl MaxEntProblem {
    /// Fails with [`Error::NoSolution`] when `E` lies outside `[a_1, a_n]`.
    pub fn new(observable: Observable, target_mean: f64) -> Result<Self> {
        if !target_mean.is_finite() {
            return Err(Error::Precondition(format!(
                "target mean {target_mean} is not finite"
            )));
        }
        if target_mean < observable.min() || target_mean > observable.max() {
            return Err(Error::NoSolution {
                mean: target_mean,
                lower: observable.min(),
                upper: observable.max(),
            });
        }
        Ok(Self {
            observable,
            target_mean,
        })
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn len(&self) -> usize {
        self.observable.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distance from `a_1` or `a_n` below which `E` counts as a boundary mean.
    pub fn boundary_eps(&self) -> f64 {
        1e-12 * 1f64.max(self.observable.min().abs()).max(self.observable.max().abs())
    }

    pub fn boundary(&self) -> Option<Boundary> {
        let eps = self.boundary_eps();
        if self.target_mean - self.observable.min() <= eps {
            Some(Boundary::Lower)
        } else if self.observable.max() - self.target_mean <= eps {
            Some(Boundary::Upper)
        } else {
            None
        }
    }

    pub fn is_interior(&self) -> bool {
        self.boundary().is_none()
    }

    pub(crate) fn require_interior(&self) -> Result<()> {
        match self.boundary() {
            None => Ok(()),
            Some(_) => Err(Error::Precondition(format!(
                "mean {} must lie strictly inside ({}, {})",
                self.target_mean,
                self.observable.min(),
                self.observable.max()
            ))),
        }
    }

    fn span_squared(&self) -> f64 {
        let s = self.observable.span();
        s * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    FixedPoint,
    Bisection,
    Newton,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::FixedPoint, Method::Bisection, Method::Newton];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::FixedPoint => "fixed-point",
            Method::Bisection => "bisection",
            Method::Newton => "newton",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-point" | "fixed_point" => Ok(Method::FixedPoint),
            "bisection" => Ok(Method::Bisection),
            "newton" => Ok(Method::Newton),
            other => Err(Error::InvalidConfig(format!(
                "unknown method {other:?} (expected fixed-point, bisection or newton)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    /// Stop once `|f(λ_k)| <= residual_tol`.
    pub residual_tol: f64,
    /// Stop once `|λ_{k+1} − λ_k| <= step_tol`.
    pub step_tol: f64,
    pub max_iter: usize,
    pub method: Method,
    /// Starting point for the fixed-point and Newton iterations; bisection
    /// always brackets outward from zero.
    pub initial_guess: f64,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-12,
            step_tol: 1e-14,
            max_iter: 1_000_000,
            method: Method::FixedPoint,
            initial_guess: 0.0,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_guess(mut self, x0: f64) -> Self {
        self.initial_guess = x0;
        self
    }

    pub fn with_residual_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "residual tolerance must be positive, got {}",
                self.residual_tol
            )));
        }
        if !(self.step_tol > 0.0 && self.step_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "step tolerance must be positive, got {}",
                self.step_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !self.initial_guess.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "initial guess {} is not finite",
                self.initial_guess
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ResidualMet,
    StepMet,
    MaxIter,
    /// Newton left the excursion bound or produced a non-finite iterate.
    Diverged,
    /// `E` sits on `a_1` or `a_n`; nothing was iterated.
    Boundary,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ResidualMet => "residual_met",
            Termination::StepMet => "step_met",
            Termination::MaxIter => "max_iter",
            Termination::Diverged => "diverged",
            Termination::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub k: usize,
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveTrace {
    pub entries: Vec<TraceEntry>,
    pub termination: Termination,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxEntResult {
    /// The multiplier; `±∞` for boundary means.
    pub lambda: f64,
    pub state: ClassicalState,
    /// Number of iterates at which the residual was evaluated.
    pub iterations: usize,
    /// `|f(λ)|` at termination.
    pub residual: f64,
    pub termination: Termination,
    pub trace: Option<SolveTrace>,
}

/// `f(x)`: the mean of `a` under `softmax(x·a)`, minus `E`.
pub fn residual(p: &MaxEntProblem, x: f64) -> f64 {
    let a = p.observable.values();
    let e = p.target_mean;
    let w = numerics::tilted_weights(a, x);
    let (num, den) = a
        .iter()
        .zip(&w)
        .fold((0.0, 0.0), |(num, den), (&ai, &wi)| (num + (ai - e) * wi, den + wi));
    num / den
}

/// `f′(x) = Σ_{i<j} w_i w_j (a_j − a_i)² / (Σ w_i)²`, the variance of `a`
/// under `softmax(x·a)`.
pub fn residual_derivative(p: &MaxEntProblem, x: f64) -> f64 {
    let a = p.observable.values();
    let w = numerics::tilted_weights(a, x);
    let total: f64 = w.iter().sum();
    let mut pairs = 0.0;
    for j in 1..a.len() {
        let inner: f64 = (0..j).map(|i| w[i] * (a[j] - a[i]).powi(2)).sum();
        pairs += w[j] * inner;
    }
    pairs / (total * total)
}

/// One step of `I_f(x) = x − f(x) / (a_n − a_1)²`.
pub fn if_step(p: &MaxEntProblem, x: f64) -> f64 {
    x - residual(p, x) / p.span_squared()
}

/// The maximum entropy state `softmax(λ·a)`, with the pure-state limits at
/// `λ = ±∞`.
pub fn maxent_state(p: &MaxEntProblem, lambda: f64) -> ClassicalState {
    let n = p.len();
    if lambda == f64::INFINITY {
        ClassicalState::pure(n, n - 1).expect("n >= 2")
    } else if lambda == f64::NEG_INFINITY {
        ClassicalState::pure(n, 0).expect("n >= 2")
    } else {
        ClassicalState::from_normalized(numerics::softmax(p.observable.values(), lambda))
    }
}

/// Solves for the multiplier with `cfg.method`.
pub fn solve(p: &MaxEntProblem, cfg: &SolverConfig) -> Result<MaxEntResult> {
    cfg.validate()?;
    if let Some(side) = p.boundary() {
        return Ok(boundary_result(p, side, cfg));
    }
    match cfg.method {
        Method::FixedPoint => fixed_point(p, cfg),
        Method::Bisection => bisection(p, cfg),
        Method::Newton => newton(p, cfg),
    }
}

/// Newton's method on `f`, regardless of `cfg.method`.
///
/// Experimental: nothing guarantees convergence. An iterate whose magnitude
/// exceeds `1e6 · (1 + B)`, with `B` the larger endpoint of the doubling
/// bracket around `λ`, is reported as divergence.
pub fn solve_newton(p: &MaxEntProblem, cfg: &SolverConfig) -> Result<MaxEntResult> {
    cfg.validate()?;
    if let Some(side) = p.boundary() {
        return Ok(boundary_result(p, side, cfg));
    }
    newton(p, cfg)
}

/// Interval `[c, d]` with `f(c) <= 0 <= f(d)`, found by doubling outward
/// from `[-1, 1]`.
pub fn multiplier_bracket(p: &MaxEntProblem) -> Result<(f64, f64)> {
    p.require_interior()?;
    let expand = |start: f64, wrong_side: &dyn Fn(f64) -> bool| -> Result<f64> {
        let mut x = start;
        while wrong_side(residual(p, x)) {
            x *= 2.0;
            if !x.is_finite() {
                return Err(Error::Precondition(format!(
                    "no sign change of the residual found for mean {}",
                    p.target_mean
                )));
            }
        }
        Ok(x)
    };
    let c = expand(-1.0, &|r| r > 0.0)?;
    let d = expand(1.0, &|r| r < 0.0)?;
    Ok((c, d))
}

struct Recorder {
    keep_all: bool,
    entries: Vec<TraceEntry>,
}

impl Recorder {
    fn new(keep_all: bool) -> Self {
        Self {
            keep_all,
            entries: Vec::new(),
        }
    }

    fn push(&mut self, k: usize, lambda: f64, residual: f64) {
        if !self.keep_all {
            self.entries.clear();
        }
        self.entries.push(TraceEntry {
            k,
            lambda,
            residual,
        });
    }

    fn count(&self) -> usize {
        self.entries.last().map_or(0, |e| e.k + 1)
    }

    fn finish(self, termination: Termination) -> SolveTrace {
        SolveTrace {
            entries: self.entries,
            termination,
        }
    }
}

fn converged(
    p: &MaxEntProblem,
    lambda: f64,
    residual: f64,
    rec: Recorder,
    termination: Termination,
) -> MaxEntResult {
    let iterations = rec.count();
    let trace = rec.keep_all.then(|| rec.finish(termination));
    MaxEntResult {
        lambda,
        state: maxent_state(p, lambda),
        iterations,
        residual: residual.abs(),
        termination,
        trace,
    }
}

fn failed(rec: Recorder, termination: Termination) -> Error {
    let iterations = rec.count();
    let residual = rec.entries.last().map_or(f64::NAN, |e| e.residual.abs());
    Error::NonConvergence {
        iterations,
        residual,
        trace: Box::new(rec.finish(termination)),
    }
}

fn boundary_result(p: &MaxEntProblem, side: Boundary, cfg: &SolverConfig) -> MaxEntResult {
    let (lambda, edge) = match side {
        Boundary::Lower => (f64::NEG_INFINITY, p.observable.min()),
        Boundary::Upper => (f64::INFINITY, p.observable.max()),
    };
    MaxEntResult {
        lambda,
        state: maxent_state(p, lambda),
        iterations: 0,
        residual: (p.target_mean - edge).abs(),
        termination: Termination::Boundary,
        trace: cfg.record_trace.then(|| SolveTrace {
            entries: Vec::new(),
            termination: Termination::Boundary,
        }),
    }
}

fn fixed_point(p: &MaxEntProblem, cfg: &SolverConfig) -> Result<MaxEntResult> {
    let scale = p.span_squared();
    let mut rec = Recorder::new(cfg.record_trace);
    let mut x = cfg.initial_guess;
    for k in 0..cfg.max_iter {
        let r = residual(p, x);
        rec.push(k, x, r);
        if r.abs() <= cfg.residual_tol {
            return Ok(converged(p, x, r, rec, Termination::ResidualMet));
        }
        let next = x - r / scale;
        if (next - x).abs() <= cfg.step_tol {
            let r_next = residual(p, next);
            rec.push(k + 1, next, r_next);
            return Ok(converged(p, next, r_next, rec, Termination::StepMet));
        }
        x = next;
    }
    Err(failed(rec, Termination::MaxIter))
}

fn bisection(p: &MaxEntProblem, cfg: &SolverConfig) -> Result<MaxEntResult> {
    let (mut lo, mut hi) = multiplier_bracket(p)?;
    let mut rec = Recorder::new(cfg.record_trace);
    for k in 0..cfg.max_iter {
        let mid = 0.5 * (lo + hi);
        let r = residual(p, mid);
        rec.push(k, mid, r);
        if r.abs() <= cfg.residual_tol {
            return Ok(converged(p, mid, r, rec, Termination::ResidualMet));
        }
        // The last two clauses catch brackets that can no longer be halved.
        if hi - lo <= cfg.step_tol || mid == lo || mid == hi {
            return Ok(converged(p, mid, r, rec, Termination::StepMet));
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(failed(rec, Termination::MaxIter))
}

fn newton(p: &MaxEntProblem, cfg: &SolverConfig) -> Result<MaxEntResult> {
    let (c, d) = multiplier_bracket(p)?;
    let excursion = 1e6 * (1.0 + c.abs().max(d.abs()));
    let mut rec = Recorder::new(cfg.record_trace);
    let mut x = cfg.initial_guess;
    for k in 0..cfg.max_iter {
        let r = residual(p, x);
        rec.push(k, x, r);
        if r.abs() <= cfg.residual_tol {
            return Ok(converged(p, x, r, rec, Termination::ResidualMet));
        }
        let next = x - r / residual_derivative(p, x);
        if !next.is_finite() || next.abs() > excursion {
            return Err(failed(rec, Termination::Diverged));
        }
        if (next - x).abs() <= cfg.step_tol {
            let r_next = residual(p, next);
            rec.push(k + 1, next, r_next);
            return Ok(converged(p, next, r_next, rec, Termination::StepMet));
        }
        x = next;
    }
    Err(failed(rec, Termination::MaxIter))
}
