//! Batch evaluation over many problems, states or grid slices.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs
//! on the rayon global pool; without it every call runs sequentially.
//! Results are always returned in input order, so both modes produce
//! identical output.

use std::fmt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lagrange::{solve, solve_newton, MaxEntProblem, MaxEntResult, SolverConfig, Termination};
use crate::state::{entropy, ClassicalState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether work actually fans out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub(crate) fn map_slice<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub(crate) fn map_range<R, F>(len: usize, exec: Execution, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Solves every problem with the same configuration.
pub fn solve_batch(
    problems: &[MaxEntProblem],
    cfg: &SolverConfig,
    exec: Execution,
) -> Vec<Result<MaxEntResult>> {
    map_slice(problems, exec, |p| solve(p, cfg))
}

/// Solves one problem from each initial guess.
pub fn solve_from_guesses(
    p: &MaxEntProblem,
    guesses: &[f64],
    cfg: &SolverConfig,
    exec: Execution,
) -> Vec<Result<MaxEntResult>> {
    map_slice(guesses, exec, |&g| solve(p, &cfg.clone().with_guess(g)))
}

/// `min_x σ(reference) − σ(x)` over `samples`; non-negative when the
/// reference has the largest entropy. `+∞` for an empty sample.
pub fn entropy_margin(reference: &ClassicalState, samples: &[ClassicalState], exec: Execution) -> f64 {
    let h = entropy(reference);
    map_slice(samples, exec, |x| h - entropy(x))
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum NewtonOutcome {
    Converged { lambda: f64, iterations: usize, deviation: f64 },
    Diverged { iterations: usize },
    MaxIter { iterations: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct NewtonRun {
    pub problem: usize,
    pub guess: f64,
    #[serde(flatten)]
    pub outcome: NewtonOutcome,
}

/// Newton's method run from several guesses on a problem suite, each run
/// compared against the fixed-point solution.
#[derive(Debug, Clone, Serialize)]
pub struct NewtonSurvey {
    pub guesses: Vec<f64>,
    pub runs: Vec<NewtonRun>,
}

/// Per-guess tallies: `(guess, converged, diverged, exhausted)`.
pub type NewtonTally = (f64, usize, usize, usize);

impl NewtonSurvey {
    pub fn tally(&self) -> Vec<NewtonTally> {
        self.guesses
            .iter()
            .map(|&g| {
                let mut t = (g, 0, 0, 0);
                for run in self.runs.iter().filter(|r| r.guess == g) {
                    match run.outcome {
                        NewtonOutcome::Converged { .. } => t.1 += 1,
                        NewtonOutcome::Diverged { .. } => t.2 += 1,
                        NewtonOutcome::MaxIter { .. } => t.3 += 1,
                    }
                }
                t
            })
            .collect()
    }

    /// Largest `|λ_newton − λ_fixed_point|` over converged runs.
    pub fn max_deviation(&self) -> f64 {
        self.runs
            .iter()
            .filter_map(|r| match r.outcome {
                NewtonOutcome::Converged { deviation, .. } => Some(deviation),
                _ => None,
            })
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for NewtonSurvey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>10} {:>10} {:>10} {:>10}", "guess", "converged", "diverged", "max_iter")?;
        for (g, c, d, m) in self.tally() {
            writeln!(f, "{g:>10} {c:>10} {d:>10} {m:>10}")?;
        }
        write!(f, "max |λ_newton − λ_fixed_point| over converged runs: {:.3e}", self.max_deviation())
    }
}

/// Runs Newton's method from every guess on every problem.
pub fn newton_survey(
    problems: &[MaxEntProblem],
    guesses: &[f64],
    cfg: &SolverConfig,
    exec: Execution,
) -> Result<NewtonSurvey> {
    let reference: Vec<f64> = solve_batch(problems, cfg, exec)
        .into_iter()
        .map(|r| r.map(|r| r.lambda))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..problems.len())
        .flat_map(|i| guesses.iter().map(move |&g| (i, g)))
        .collect();
    let runs = map_slice(&jobs, exec, |&(i, guess)| {
        let outcome = match solve_newton(&problems[i], &cfg.clone().with_guess(guess)) {
            Ok(r) => NewtonOutcome::Converged {
                lambda: r.lambda,
                iterations: r.iterations,
                deviation: (r.lambda - reference[i]).abs(),
            },
            Err(Error::NonConvergence { iterations, trace, .. }) => match trace.termination {
                Termination::Diverged => NewtonOutcome::Diverged { iterations },
                _ => NewtonOutcome::MaxIter { iterations },
            },
            Err(e) => return Err(e),
        };
        Ok(NewtonRun {
            problem: i,
            guess,
            outcome,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(NewtonSurvey {
        guesses: guesses.to_vec(),
        runs,
    })
}
