//! The Bayesian order on classical states and the map `φ` whose least fixed
//! point, reached by iterating from `⊥`, is the maximum entropy state.
//!
//! Two decision procedures are provided. [`leq_projective`] follows the
//! recursive definition through Bayesian projections down to two outcomes,
//! where `x ⊑ y` iff `y_1 ≤ x_1 ≤ 1/2` or `1/2 ≤ x_1 ≤ y_1`; it costs
//! `O(n!)` and is limited to small `n`. [`leq_symmetric`] uses the
//! equivalent characterization: `x ⊑ y` iff some permutation `σ` puts both
//! states in decreasing order with `(xσ)_i (yσ)_{i+1} ≤ (xσ)_{i+1} (yσ)_i`
//! for all `i < n`.
//!
//! For an interior problem, `λ(x)` reads a multiplier off the two largest
//! entries of `x`, and `φ(x) = softmax(I_f(λ(x)) · a)`. Since
//! `λ(φ(x)) = I_f(λ(x))`, the chain `φᵏ(⊥)` tracks the iterates `I_fᵏ(0)`.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::lagrange::{if_step, residual, MaxEntProblem};
use crate::numerics;
use crate::state::{descending, sort_desc, ClassicalState};

/// Slack allowed in the order's inequalities.
pub const ORDER_TOLERANCE: f64 = 1e-12;

/// Largest `n` accepted by [`leq_projective`].
pub const PROJECTIVE_MAX_N: usize = 6;

/// Default max-norm tolerance between successive `φ` iterates.
pub const CHAIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderVerdict {
    pub related: bool,
    /// Zero-based `σ` with `σ[k]` the original index placed at position `k`;
    /// present when `related`.
    pub witness_permutation: Option<Vec<usize>>,
}

/// Decides `x ⊑ y` with [`ORDER_TOLERANCE`].
pub fn leq_symmetric(x: &ClassicalState, y: &ClassicalState) -> Result<OrderVerdict> {
    leq_symmetric_with_tol(x, y, ORDER_TOLERANCE)
}

/// Decides `x ⊑ y` through the permutation characterization.
///
/// A valid `σ` must sort `x` decreasingly, which fixes it up to reordering
/// within blocks of equal `x` entries; inside those blocks it must sort `y`
/// decreasingly as well. The inequalities do not depend on which of the
/// remaining equivalent permutations is used, so one candidate is checked.
pub fn leq_symmetric_with_tol(
    x: &ClassicalState,
    y: &ClassicalState,
    tol: f64,
) -> Result<OrderVerdict> {
    check_len(x.len(), y.len())?;
    let (xp, yp) = (x.probs(), y.probs());
    let n = xp.len();

    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.sort_by(|&i, &j| descending(xp[i], xp[j]));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && xp[sigma[end - 1]] - xp[sigma[end]] <= tol {
            end += 1;
        }
        sigma[start..end].sort_by(|&i, &j| descending(yp[i], yp[j]));
        start = end;
    }

    let related = sigma.windows(2).all(|w| {
        let (i, j) = (w[0], w[1]);
        yp[j] <= yp[i] + tol && xp[i] * yp[j] <= xp[j] * yp[i] + tol
    });
    Ok(OrderVerdict {
        related,
        witness_permutation: related.then_some(sigma),
    })
}

/// Decides `x ⊑ y` from the recursive definition, with [`ORDER_TOLERANCE`].
pub fn leq_projective(x: &ClassicalState, y: &ClassicalState) -> Result<bool> {
    leq_projective_with_tol(x, y, ORDER_TOLERANCE)
}

pub fn leq_projective_with_tol(x: &ClassicalState, y: &ClassicalState, tol: f64) -> Result<bool> {
    check_len(x.len(), y.len())?;
    if x.len() > PROJECTIVE_MAX_N {
        return Err(Error::SizeLimit {
            n: x.len(),
            max: PROJECTIVE_MAX_N,
        });
    }
    Ok(projective(x.probs(), y.probs(), tol))
}

fn projective(x: &[f64], y: &[f64], tol: f64) -> bool {
    if x.len() == 2 {
        let (x1, y1) = (x[0], y[0]);
        return (y1 <= x1 + tol && x1 <= 0.5 + tol) || (0.5 <= x1 + tol && x1 <= y1 + tol);
    }
    (0..x.len()).all(|i| match (drop_and_renormalize(x, i), drop_and_renormalize(y, i)) {
        (Some(px), Some(py)) => projective(&px, &py, tol),
        // One of the states is e_i: the clause for p_i is vacuous.
        _ => true,
    })
}

fn drop_and_renormalize(x: &[f64], i: usize) -> Option<Vec<f64>> {
    let rest: f64 = x
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, p)| p)
        .sum();
    (x[i] != 1.0 && rest > 0.0).then(|| {
        x.iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p / rest)
            .collect()
    })
}

/// Which formula defines `λ(x)`: it is chosen by the sign of `I_f(0)`,
/// which equals the sign of the multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `I_f(0) > 0`: `λ(x) = log(s_1/s_2) / (a_n − a_{n−1})`.
    Positive,
    /// `I_f(0) <= 0`: `λ(x) = log(s_1/s_2) / (a_1 − a_2)`.
    NonPositive,
}

pub fn branch(p: &MaxEntProblem) -> Branch {
    if if_step(p, 0.0) > 0.0 {
        Branch::Positive
    } else {
        Branch::NonPositive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaValue {
    /// `λ(x)`; `±∞` for pure states.
    pub value: f64,
    /// Set when the second-largest entry is zero although the largest is
    /// not exactly one.
    pub degenerate: bool,
}

/// `λ(x)` for an interior problem.
pub fn lambda_functional(x: &ClassicalState, p: &MaxEntProblem) -> Result<LambdaValue> {
    p.require_interior()?;
    check_len(p.len(), x.len())?;
    let a = p.observable().values();
    let n = a.len();
    let s = sort_desc(x);
    let (s1, s2) = (s.probs()[0], s.probs()[1]);
    let br = branch(p);
    if s2 == 0.0 {
        let value = match br {
            Branch::Positive => f64::INFINITY,
            Branch::NonPositive => f64::NEG_INFINITY,
        };
        return Ok(LambdaValue {
            value,
            degenerate: s1 != 1.0,
        });
    }
    let log_ratio = (s1 / s2).ln();
    let value = match br {
        Branch::Positive => log_ratio / (a[n - 1] - a[n - 2]),
        Branch::NonPositive => log_ratio / (a[0] - a[1]),
    };
    Ok(LambdaValue {
        value,
        degenerate: false,
    })
}

/// `φ(x) = softmax(I_f(λ(x)) · a)`, with the pure-state limits when
/// `λ(x) = ±∞`.
pub fn phi(x: &ClassicalState, p: &MaxEntProblem) -> Result<ClassicalState> {
    let lambda = lambda_functional(x, p)?.value;
    let n = p.len();
    if lambda == f64::INFINITY {
        return ClassicalState::pure(n, n - 1);
    }
    if lambda == f64::NEG_INFINITY {
        return ClassicalState::pure(n, 0);
    }
    let t = if_step(p, lambda);
    Ok(ClassicalState::from_normalized(numerics::softmax(
        p.observable().values(),
        t,
    )))
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiChain {
    /// `φᵏ(⊥)` for `k = 0..=K`.
    pub states: Vec<ClassicalState>,
    /// `λ(φᵏ(⊥))`, which tracks `I_fᵏ(0)`.
    pub lambdas: Vec<f64>,
    /// False when the step budget ran out before successive states agreed
    /// to within the tolerance.
    pub converged: bool,
}

impl PhiChain {
    pub fn terminal(&self) -> &ClassicalState {
        self.states.last().expect("chain starts at bottom")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `f(λ_k)` for every recorded `λ_k`.
    pub fn residuals(&self, p: &MaxEntProblem) -> Vec<f64> {
        self.lambdas.iter().map(|&l| residual(p, l)).collect()
    }
}

/// Iterates `φ` from `⊥` until successive states are closer than `tol` in
/// max norm or `max_steps` applications have been made.
///
/// The state that is within `tol` of its predecessor is not appended, so a
/// problem whose fixed point is `⊥` yields a chain of length one.
pub fn phi_chain(p: &MaxEntProblem, max_steps: usize, tol: f64) -> Result<PhiChain> {
    p.require_interior()?;
    if max_steps == 0 {
        return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidConfig(format!("chain tolerance must be positive, got {tol}")));
    }
    let mut states = vec![ClassicalState::uniform(p.len())?];
    let mut lambdas = vec![0.0];
    let mut converged = false;
    for _ in 0..max_steps {
        let current = states.last().expect("non-empty");
        let next = phi(current, p)?;
        if numerics::max_abs_diff(current.probs(), next.probs()) < tol {
            converged = true;
            break;
        }
        lambdas.push(lambda_functional(&next, p)?.value);
        states.push(next);
    }
    Ok(PhiChain {
        states,
        lambdas,
        converged,
    })
}
