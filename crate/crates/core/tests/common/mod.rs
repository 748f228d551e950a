#![allow(dead_code)]

use maxent::{ClassicalState, MaxEntProblem, Observable};
use rand::Rng;

/// Strictly increasing values in `[lo, hi]` with neighbouring gaps of at
/// least `1e-3`.
pub fn random_observable(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Observable {
    loop {
        let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
        a.sort_by(f64::total_cmp);
        if a.windows(2).all(|w| w[1] - w[0] >= 1e-3) {
            return Observable::new(a).unwrap();
        }
    }
}

/// `n ∈ [2, 10]`, values in `[−5, 5]`, and a mean `a_1 + u·(a_n − a_1)` with
/// `u ∈ [0.01, 0.99]`.
pub fn random_interior_problem(rng: &mut impl Rng) -> MaxEntProblem {
    let n = rng.random_range(2..=10);
    let a = random_observable(rng, n, -5.0, 5.0);
    let e = a.min() + rng.random_range(0.01..=0.99) * a.span();
    MaxEntProblem::new(a, e).unwrap()
}

/// Uniform on the simplex.
pub fn random_state(rng: &mut impl Rng, n: usize) -> ClassicalState {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    ClassicalState::new(w.into_iter().map(|v| v / total).collect()).unwrap()
}

/// A state above `x` in the Bayesian order: sorted by `x`, each successive
/// entry is shrunk by a further random factor, then renormalized.
pub fn random_state_above(rng: &mut impl Rng, x: &ClassicalState) -> ClassicalState {
    let order = maxent::state::descending_order(x);
    let mut y = vec![0.0; x.len()];
    let mut r = 1.0;
    for &i in &order {
        y[i] = x.probs()[i] * r;
        r *= rng.random_range(0.2..1.0);
    }
    let total: f64 = y.iter().sum();
    ClassicalState::new(y.into_iter().map(|v| v / total).collect()).unwrap()
}

/// Random pair, half of them comparable by construction.
pub fn random_pair(rng: &mut impl Rng, n: usize) -> (ClassicalState, ClassicalState) {
    let x = random_state(rng, n);
    let y = if rng.random_bool(0.5) {
        random_state(rng, n)
    } else {
        random_state_above(rng, &x)
    };
    if rng.random_bool(0.5) {
        (x, y)
    } else {
        (y, x)
    }
}

/// Shannon entropy in nats, summed directly.
pub fn naive_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&q| q > 0.0).map(|q| q * q.ln()).sum::<f64>()
}

/// `f(x) − (a_k − E)` with `k` the dominant index, i.e. the mean of
/// `a − a_k` under `softmax(x·a)`, evaluated so that it keeps relative
/// precision when the distribution is nearly pure.
pub fn residual_offset(a: &[f64], x: f64) -> f64 {
    let k = if x >= 0.0 { a.len() - 1 } else { 0 };
    let (mut num, mut den) = (0.0, 0.0);
    for &ai in a {
        let d = ai - a[k];
        let w = (x * d).exp();
        num += d * w;
        den += w;
    }
    num / den
}

/// Max-entropy state for a = (0,1,2), E = 1/2, from the quadratic
/// `3u² + u − 1 = 0`, `u = e^λ`.
pub fn quadratic_lambda() -> f64 {
    ((-1.0 + 13f64.sqrt()) / 6.0).ln()
}

pub fn quadratic_state() -> [f64; 3] {
    let u = (-1.0 + 13f64.sqrt()) / 6.0;
    let z = 1.0 + u + u * u;
    [1.0 / z, u / z, u * u / z]
}
