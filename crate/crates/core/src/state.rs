//! Classical states, observables, and the elementary operations on them.
//!
//! Indices are zero-based throughout the library API.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{check_len, Error, Result};

/// States whose entries sum to within this distance of one are renormalized.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;

/// Outcome values `a_1 < a_2 < … < a_n`, `n >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Observable {
    values: Vec<f64>,
}

impl Observable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidObservable(format!(
                "at least 2 outcomes are required, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidObservable(format!(
                "value {} at index {i} is not finite",
                values[i]
            )));
        }
        if let Some(i) = values.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidObservable(format!(
                "values must be strictly increasing, but {} at index {i} is followed by {}",
                values[i],
                values[i + 1]
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest value `a_1`.
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Largest value `a_n`.
    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `a_n - a_1`.
    pub fn span(&self) -> f64 {
        self.max() - self.min()
    }

    /// The observable `a + c·1`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v + c).collect())
    }

    /// Mean of the values, i.e. the expectation under the uniform state.
    pub fn uniform_mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }
}

/// A point of the probability simplex on `n >= 2` outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ClassicalState {
    probs: Vec<f64>,
}

impl ClassicalState {
    /// Validates `probs`, renormalizing when the sum is within
    /// [`RENORMALIZE_TOLERANCE`] of one.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidState(format!(
                "at least 2 outcomes are required, got {}",
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidState(format!(
                    "entry {p} at index {i} is not a probability"
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "entries sum to {total}, not 1"
            )));
        }
        if total != 1.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Self { probs })
    }

    /// Wraps a vector that is already a probability vector up to rounding.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!(probs.len() >= 2);
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        Self { probs }
    }

    /// The least element `⊥ = (1/n, …, 1/n)`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidState(format!(
                "at least 2 outcomes are required, got {n}"
            )));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    /// The pure state `e_i`.
    pub fn pure(n: usize, i: usize) -> Result<Self> {
        if n < 2 || i >= n {
            return Err(Error::InvalidState(format!(
                "no pure state e_{i} on {n} outcomes"
            )));
        }
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index `i` when this is the pure state `e_i`.
    pub fn pure_index(&self) -> Option<usize> {
        self.probs.iter().position(|&p| p == 1.0)
    }

    /// Max-norm distance to another state of the same length.
    pub fn max_distance(&self, other: &ClassicalState) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(crate::numerics::max_abs_diff(&self.probs, &other.probs))
    }
}

/// `⟨a|x⟩ = Σ a_i x_i`.
pub fn expectation(a: &Observable, x: &ClassicalState) -> Result<f64> {
    check_len(a.len(), x.len())?;
    let mean: f64 = a.values().iter().zip(x.probs()).map(|(a, p)| a * p).sum();
    // Rounding can push the sum a hair outside the hull of the values.
    Ok(mean.clamp(a.min(), a.max()))
}

/// Shannon entropy with natural logarithm and `0 log 0 = 0`.
pub fn entropy(x: &ClassicalState) -> f64 {
    entropy_of(x.probs())
}

pub(crate) fn entropy_of(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.ln()).sum();
    h.max(0.0)
}

/// Bayesian projection `p_i`: drop outcome `i` and renormalize.
pub fn project(x: &ClassicalState, i: usize) -> Result<ClassicalState> {
    let n = x.len();
    if i >= n {
        return Err(Error::Domain(format!("index {i} out of range for {n} outcomes")));
    }
    if n == 2 {
        return Err(Error::Domain(
            "projecting a 2-outcome state leaves a single outcome".into(),
        ));
    }
    if x.probs()[i] == 1.0 {
        return Err(Error::Domain(format!("state is e_{i}, outside dom(p_{i})")));
    }
    let rest: f64 = x
        .probs()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, p)| p)
        .sum();
    if rest <= 0.0 {
        return Err(Error::Domain(format!("state is e_{i}, outside dom(p_{i})")));
    }
    let probs = x
        .probs()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, p)| p / rest)
        .collect();
    Ok(ClassicalState::from_normalized(probs))
}

/// Indices that put `x` into decreasing order; ties keep their original order.
pub fn descending_order(x: &ClassicalState) -> Vec<usize> {
    let p = x.probs();
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&i, &j| descending(p[i], p[j]));
    idx
}

/// The entries of `x` in decreasing order (stable on ties).
pub fn sort_desc(x: &ClassicalState) -> ClassicalState {
    let probs = descending_order(x).into_iter().map(|i| x.probs()[i]).collect();
    ClassicalState { probs }
}

#[inline]
pub(crate) fn descending(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}
