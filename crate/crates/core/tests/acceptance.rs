//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use maxent::batch::{newton_survey, solve_from_guesses, Execution};
use maxent::cli::{self, exit};
use maxent::lagrange::{multiplier_bracket, Termination};
use maxent::order::CHAIN_TOLERANCE;
use maxent::{
    constrained_sampler, entropy, equilibrium_state, expectation, free_energy, if_step, lambda_functional,
    leq_projective, leq_symmetric, log_partition, oracle_lambda_n2, oracle_maxent_grid, phi, phi_chain, project,
    residual, residual_derivative, solve, ClassicalState, GridSpec, MaxEntProblem, Observable, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Check = Result<String, String>;

struct Suite {
    failures: usize,
}

impl Suite {
    fn run(&mut self, id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:.2?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {id:>2}  {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                self.failures += 1;
                println!("FAIL  {id:>2}  {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn problem(a: &[f64], e: f64) -> MaxEntProblem {
    MaxEntProblem::new(Observable::new(a.to_vec()).unwrap(), e).unwrap()
}

fn suite_problems() -> Vec<MaxEntProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..100).map(|_| random_interior_problem(&mut rng)).collect()
}

const GUESSES: [f64; 5] = [-100.0, -1.0, 0.0, 1.0, 100.0];

fn die_example() -> Check {
    let out = cli::run(["maxent", "solve", "--obs", "1,2,3,4,5,6", "--mean", "3.5"], None);
    ensure(out.code == exit::SUCCESS, || format!("exit {} ({})", out.code, out.stderr))?;
    let v: serde_json::Value = serde_json::from_str(&out.stdout).map_err(|e| e.to_string())?;
    let lambda = v["result"]["lambda"].as_f64().ok_or("lambda missing")?;
    ensure(lambda.abs() <= 1e-12, || format!("lambda {lambda}"))?;
    let state: Vec<f64> = v["result"]["state"]
        .as_array()
        .ok_or("state missing")?
        .iter()
        .map(|q| q.as_f64().unwrap())
        .collect();
    let dev = state.iter().map(|q| (q - 1.0 / 6.0).abs()).fold(0.0, f64::max);
    ensure(state.len() == 6 && dev <= 1e-10, || format!("state deviation {dev:e}"))?;
    Ok(format!("lambda = {lambda}, max |y_i - 1/6| = {dev:.1e}"))
}

fn derivative_bounds() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=10);
        let a = random_observable(&mut rng, n, -5.0, 5.0);
        let x = rng.random_range(-20.0..=20.0);
        let p = MaxEntProblem::new(a.clone(), a.uniform_mean()).unwrap();
        let d = residual_derivative(&p, x);
        let span2 = a.span() * a.span();
        ensure(d > 0.0 && d < span2, || format!("f'({x}) = {d:e} outside (0, {span2}) for {:?}", a.values()))?;
        let fd = (residual_offset(a.values(), x + h) - residual_offset(a.values(), x - h)) / (2.0 * h);
        let rel = ((d - fd) / fd).abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-6, || format!("relative error {rel:e} at x = {x} for {:?}", a.values()))?;
    }
    Ok(format!("1000 pairs, worst relative error {worst:.1e}"))
}

fn global_convergence(problems: &[MaxEntProblem]) -> Check {
    let cfg = SolverConfig::default().with_trace(true);
    let mut iterations = 0;
    for (i, p) in problems.iter().enumerate() {
        let runs = solve_from_guesses(p, &GUESSES, &cfg, Execution::default());
        let mut lambdas = Vec::new();
        for (g, r) in GUESSES.iter().zip(runs) {
            let r = r.map_err(|e| format!("problem {i}, guess {g}: {e}"))?;
            let res = residual(p, r.lambda).abs();
            ensure(res <= 1e-10, || format!("problem {i}, guess {g}: |f| = {res:e}"))?;
            iterations += r.iterations;
            lambdas.push((g, r.lambda, r.trace.unwrap()));
        }
        let l0 = lambdas[2].1;
        for (g, l, trace) in &lambdas {
            ensure((l - l0).abs() <= 1e-8, || format!("problem {i}: guess {g} gives {l}, guess 0 gives {l0}"))?;
            // Monotone toward λ: every step moves toward λ and never past it.
            let xs: Vec<f64> = trace.entries.iter().map(|e| e.lambda).collect();
            let up = xs[0] <= l0;
            for w in xs.windows(2) {
                let ok = if up {
                    w[1] >= w[0] - 1e-12 && w[1] <= l0 + 1e-8
                } else {
                    w[1] <= w[0] + 1e-12 && w[1] >= l0 - 1e-8
                };
                ensure(ok, || format!("problem {i}, guess {g}: non-monotone step {} -> {}", w[0], w[1]))?;
            }
        }
    }
    Ok(format!("{} solves, {iterations} residual evaluations", problems.len() * GUESSES.len()))
}

fn constraint_and_optimality(problems: &[MaxEntProblem]) -> Check {
    let mut min_margin = f64::INFINITY;
    for (i, p) in problems.iter().enumerate() {
        let r = solve(p, &SolverConfig::default()).map_err(|e| e.to_string())?;
        let mean = expectation(p.observable(), &r.state).unwrap();
        ensure((mean - p.target_mean()).abs() <= 1e-8, || format!("problem {i}: mean {mean} vs {}", p.target_mean()))?;
        let h = entropy(&r.state);
        let samples = constrained_sampler(p, 1000, 100 + i as u64).map_err(|e| e.to_string())?;
        for x in &samples {
            let m = h - entropy(x);
            min_margin = min_margin.min(m);
            ensure(m >= -1e-9, || format!("problem {i}: sample beats solver by {:e}", -m))?;
        }
    }
    Ok(format!("100 problems x 1000 samples, smallest entropy margin {min_margin:.3e}"))
}

fn closed_form_two_outcomes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    // The default residual tolerance only bounds λ to 1e-12 / f′(λ), and
    // f′ = p(1−p)·span² is small for narrow observables; λ accuracy needs a
    // tighter residual.
    let cfg = SolverConfig::default().with_residual_tol(1e-15);
    for _ in 0..200 {
        let a = random_observable(&mut rng, 2, -5.0, 5.0);
        let e = a.min() + rng.random_range(0.01..=0.99) * a.span();
        let p = MaxEntProblem::new(a, e).unwrap();
        let l = solve(&p, &cfg).map_err(|e| e.to_string())?.lambda;
        let oracle = oracle_lambda_n2(&p).map_err(|e| e.to_string())?;
        let d = (l - oracle).abs();
        worst = worst.max(d);
        ensure(d <= 1e-10, || format!("{:?}, E = {e}: solver {l}, closed form {oracle}", p.observable().values()))?;
    }
    Ok(format!("200 problems, worst |Δλ| = {worst:.1e}"))
}

fn grid_agreement() -> Check {
    let p = problem(&[0.0, 1.0, 2.0], 0.5);
    let r = solve(&p, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let grid = oracle_maxent_grid(&p, &GridSpec::new(400, 3).unwrap(), Execution::default()).map_err(|e| e.to_string())?;
    let gap = r.state.max_distance(&grid).unwrap();
    ensure(gap <= 5e-3, || format!("max-norm gap {gap:e}"))?;
    let dl = (r.lambda - quadratic_lambda()).abs();
    ensure(dl <= 1e-4, || format!("lambda {} vs {}", r.lambda, quadratic_lambda()))?;
    Ok(format!("grid gap {gap:.2e}, |λ − λ*| = {dl:.1e}"))
}

fn chain_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut longest = 0;
    for i in 0..20 {
        let p = random_interior_problem(&mut rng);
        // (a) along φᵏ(⊥) directly, k ≤ 50.
        let mut x = ClassicalState::uniform(p.len()).unwrap();
        let mut t = 0.0;
        for k in 0..=50 {
            let l = lambda_functional(&x, &p).map_err(|e| e.to_string())?.value;
            ensure((l - t).abs() <= 1e-12, || format!("problem {i}, k = {k}: λ(φᵏ⊥) = {l}, I_fᵏ(0) = {t}"))?;
            x = phi(&x, &p).map_err(|e| e.to_string())?;
            t = if_step(&p, t);
        }
        let chain = phi_chain(&p, 10_000_000, CHAIN_TOLERANCE).map_err(|e| e.to_string())?;
        ensure(chain.converged, || format!("problem {i}: chain truncated"))?;
        longest = longest.max(chain.len());
        // (b)
        for (k, w) in chain.states.windows(2).enumerate() {
            let v = leq_symmetric(&w[0], &w[1]).unwrap();
            ensure(v.related, || format!("problem {i}: φ^{k}(⊥) ⋢ φ^{}(⊥)", k + 1))?;
        }
        // (c)
        let r = solve(&p, &SolverConfig::default()).map_err(|e| e.to_string())?;
        let d = chain.terminal().max_distance(&r.state).unwrap();
        ensure(d <= 1e-8, || format!("problem {i}: terminal state {d:e} from solver"))?;
    }
    Ok(format!("20 problems, longest chain {longest}"))
}

fn order_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut related = 0;
    for n in [3, 4] {
        for _ in 0..1000 {
            let (x, y) = random_pair(&mut rng, n);
            let s = leq_symmetric(&x, &y).unwrap().related;
            let q = leq_projective(&x, &y).unwrap();
            ensure(s == q, || format!("{x:?} vs {y:?}: symmetric {s}, projective {q}"))?;
            related += s as usize;
        }
    }
    Ok(format!("2000 pairs, {related} related"))
}

fn projection_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for _ in 0..1000 {
        let n = rng.random_range(3..=8);
        let x = random_state(&mut rng, n);
        for k in 0..n {
            let xk = x.probs()[k];
            if xk == 1.0 {
                continue;
            }
            let pk = project(&x, k).map_err(|e| e.to_string())?;
            let rhs = (1.0 - xk) * entropy(&pk) + naive_entropy(&[xk, 1.0 - xk]);
            let d = (entropy(&x) - rhs).abs();
            worst = worst.max(d);
            checked += 1;
            ensure(d <= 1e-12, || format!("{x:?}, k = {k}: off by {d:e}"))?;
        }
    }
    Ok(format!("{checked} (state, k) pairs, worst {worst:.1e}"))
}

fn equilibrium_free_energy() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=10);
        let a = random_observable(&mut rng, n, -5.0, 5.0);
        let eq = equilibrium_state(&a);
        let bound = -log_partition(&a);
        let f = free_energy(&a, &eq.state).map_err(|e| e.to_string())?;
        worst = worst.max((f - bound).abs());
        ensure((f - bound).abs() <= 1e-10, || format!("{:?}: F(y) = {f}, −log Za = {bound}", a.values()))?;
        for _ in 0..1000 {
            let x = random_state(&mut rng, n);
            let fx = free_energy(&a, &x).unwrap();
            ensure(fx >= bound - 1e-12, || format!("{:?}: F(x) = {fx} below {bound}", a.values()))?;
        }
    }
    Ok(format!("100 observables x 1000 states, worst |F(y) + log Za| = {worst:.1e}"))
}

fn boundary_behavior() -> Check {
    let a = [0.0, 1.0, 2.0];
    let low = solve(&problem(&a, 0.0), &SolverConfig::default()).map_err(|e| e.to_string())?;
    ensure(low.lambda == f64::NEG_INFINITY, || format!("E = a_1 gives λ = {}", low.lambda))?;
    ensure(low.state == ClassicalState::pure(3, 0).unwrap(), || format!("E = a_1 gives {:?}", low.state))?;
    let high = solve(&problem(&a, 2.0), &SolverConfig::default()).map_err(|e| e.to_string())?;
    ensure(high.lambda == f64::INFINITY, || format!("E = a_n gives λ = {}", high.lambda))?;
    ensure(high.state == ClassicalState::pure(3, 2).unwrap(), || format!("E = a_n gives {:?}", high.state))?;
    ensure(low.termination == Termination::Boundary && high.termination == Termination::Boundary, || {
        "boundary termination not reported".into()
    })?;

    let bin = env!("CARGO_BIN_EXE_maxent");
    for (mean, code, lambda) in [("0", exit::SUCCESS, Some("-inf")), ("2", exit::SUCCESS, Some("inf")), ("2.5", exit::NO_SOLUTION, None), ("-0.1", exit::NO_SOLUTION, None)] {
        let out = Command::new(bin)
            .args(["solve", "--obs", "0,1,2", "--mean", mean])
            .output()
            .map_err(|e| e.to_string())?;
        let got = out.status.code().unwrap_or(-1);
        ensure(got == code, || format!("mean {mean}: exit {got}, expected {code}"))?;
        if let Some(l) = lambda {
            let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
            ensure(v["result"]["lambda"] == l, || format!("mean {mean}: lambda {}", v["result"]["lambda"]))?;
        } else {
            let err = String::from_utf8_lossy(&out.stderr);
            ensure(err.contains("outside [0,2]"), || format!("mean {mean}: stderr {err:?}"))?;
        }
    }
    Ok("e_1 / e_n with λ = ∓∞; outside means exit 2".into())
}

fn majorization_regression() -> Check {
    let p = problem(&[1.0, 2.0, 3.0], 2.0);
    let bottom = ClassicalState::uniform(3).unwrap();
    let x = ClassicalState::new(vec![0.5, 0.4, 0.1]).unwrap();
    let y = ClassicalState::new(vec![0.5, 0.5, 0.0]).unwrap();
    let py = phi(&y, &p).map_err(|e| e.to_string())?;
    let px = phi(&x, &p).map_err(|e| e.to_string())?;
    ensure(py == bottom, || format!("φ(y) = {py:?}"))?;
    let d = px.max_distance(&bottom).unwrap();
    ensure(d > 1e-6, || format!("φ(x) within {d:e} of ⊥"))?;
    Ok(format!("φ(y) = ⊥, φ(x) is {d:.3e} from ⊥"))
}

fn newton_report(problems: &[MaxEntProblem]) -> Check {
    let survey = newton_survey(problems, &GUESSES, &SolverConfig::default(), Execution::default())
        .map_err(|e| e.to_string())?;
    println!("{survey}");
    let (c, d, m) = survey
        .tally()
        .iter()
        .fold((0, 0, 0), |acc, t| (acc.0 + t.1, acc.1 + t.2, acc.2 + t.3));
    Ok(format!("informational: {c} converged, {d} diverged, {m} exhausted"))
}

fn main() -> ExitCode {
    let problems = suite_problems();
    // Sanity: every suite problem has a bracketed multiplier.
    for p in &problems {
        multiplier_bracket(p).expect("bracket");
    }
    let secs = Duration::from_secs;
    let mut s = Suite { failures: 0 };
    s.run(1, "die example", Some(Duration::from_millis(10)), die_example);
    s.run(2, "derivative bounds", Some(secs(5)), derivative_bounds);
    s.run(3, "global convergence", Some(secs(60)), || global_convergence(&problems));
    s.run(4, "constraint and optimality", Some(secs(120)), || constraint_and_optimality(&problems));
    s.run(5, "closed-form n=2 oracle", None, closed_form_two_outcomes);
    s.run(6, "grid-oracle agreement", Some(secs(30)), grid_agreement);
    s.run(7, "phi-chain correctness", Some(secs(60)), chain_correctness);
    s.run(8, "order-definition equivalence", Some(secs(30)), order_equivalence);
    s.run(9, "entropy/projection identity", None, projection_identity);
    s.run(10, "equilibrium free energy", None, equilibrium_free_energy);
    s.run(11, "boundary behavior", None, boundary_behavior);
    s.run(12, "majorization regression", None, majorization_regression);
    s.run(13, "Newton comparator report", None, || newton_report(&problems));
    if s.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", s.failures);
        ExitCode::FAILURE
    }
}
