//! Maximum entropy states of a finite random variable under a mean
//! constraint, computed by a globally convergent fixed-point iteration on
//! the Lagrange multiplier, together with the Bayesian order that makes the
//! iteration a monotone chain of states.
//!
//! ```
//! use maxent::{solve, MaxEntProblem, Observable, SolverConfig};
//!
//! let a = Observable::new(vec![0.0, 1.0, 2.0]).unwrap();
//! let p = MaxEntProblem::new(a, 0.5).unwrap();
//! let r = solve(&p, &SolverConfig::default()).unwrap();
//! assert!((r.lambda + 0.8341152).abs() < 1e-7);
//! ```

pub mod batch;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod lagrange;
mod numerics;
pub mod oracle;
pub mod order;
pub mod state;

pub use batch::{solve_batch, Execution};
pub use equilibrium::{equilibrium_state, free_energy, log_partition, EquilibriumResult};
pub use error::{Error, Result};
pub use lagrange::{
    if_step, maxent_state, residual, residual_derivative, solve, solve_newton, MaxEntProblem, MaxEntResult, Method,
    SolverConfig, Termination,
};
pub use oracle::{constrained_sampler, oracle_lambda_n2, oracle_maxent_grid, GridSpec};
pub use order::{lambda_functional, leq_projective, leq_symmetric, phi, phi_chain, OrderVerdict, PhiChain};
pub use state::{entropy, expectation, project, sort_desc, ClassicalState, Observable};
