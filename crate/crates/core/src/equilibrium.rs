//! Partition function, Boltzmann state, and the free-energy functional
//! `⟨a|x⟩ − σx` that the Boltzmann state minimizes.

use serde::Serialize;

use crate::error::Result;
use crate::numerics;
use crate::state::{entropy, expectation, ClassicalState, Observable};

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumResult {
    /// `y_i = e^{−a_i} / Za`; every entry is strictly positive.
    pub state: ClassicalState,
    /// `log Za`.
    pub log_partition: f64,
    /// `⟨a|y⟩ − σy`, equal to `−log Za`.
    pub functional_value: f64,
}

/// `log Za = log Σ e^{−a_i}`.
pub fn log_partition(a: &Observable) -> f64 {
    numerics::log_sum_exp(a.values(), -1.0)
}

pub fn equilibrium_state(a: &Observable) -> EquilibriumResult {
    let state = ClassicalState::from_normalized(numerics::softmax(a.values(), -1.0));
    let functional_value = free_energy(a, &state).expect("lengths agree by construction");
    EquilibriumResult {
        state,
        log_partition: log_partition(a),
        functional_value,
    }
}

/// `⟨a|x⟩ − σx`.
pub fn free_energy(a: &Observable, x: &ClassicalState) -> Result<f64> {
    Ok(expectation(a, x)? - entropy(x))
}
