//! Independent references for the solver: a brute-force grid search over
//! the constraint slice, the closed-form multiplier for two outcomes, and a
//! seeded sampler of feasible states.
//!
//! None of these go through the multiplier equation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::batch::{map_range, Execution};
use crate::error::{check_len, Error, Result};
use crate::lagrange::MaxEntProblem;
use crate::state::{entropy_of, ClassicalState, Observable};

/// Largest number of outcomes the grid search accepts.
pub const GRID_MAX_N: usize = 4;

/// Feasibility required of every sampled state.
pub const SAMPLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    /// Grid points per simplex edge.
    pub resolution: usize,
    pub dimension: usize,
}

impl GridSpec {
    pub const DEFAULT_RESOLUTION: usize = 200;

    pub fn new(resolution: usize, dimension: usize) -> Result<Self> {
        if resolution < 10 {
            return Err(Error::Oracle(format!(
                "grid resolution must be at least 10, got {resolution}"
            )));
        }
        if !(2..=GRID_MAX_N).contains(&dimension) {
            return Err(Error::SizeLimit {
                n: dimension,
                max: GRID_MAX_N,
            });
        }
        Ok(Self {
            resolution,
            dimension,
        })
    }
}

/// Maximum entropy over grid points `k/R` whose mean lies within
/// `(a_n − a_1)/R` of `E`.
///
/// Each such point is first moved onto the hyperplane `⟨a|x⟩ = E` along
/// `a − ā·1`, which preserves the total mass; points that leave the simplex
/// are dropped. The returned state is therefore exactly feasible.
pub fn oracle_maxent_grid(p: &MaxEntProblem, g: &GridSpec, exec: Execution) -> Result<ClassicalState> {
    p.require_interior()?;
    check_len(g.dimension, p.len())?;
    let a = p.observable().values();
    let n = a.len();
    let r = g.resolution;
    let slack = p.observable().span() / r as f64;
    let target = p.target_mean();
    let (dir, dir_norm) = mean_direction(p.observable());

    let best_for_first = |k0: usize| -> Option<(f64, Vec<f64>)> {
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut counts = vec![0usize; n];
        counts[0] = k0;
        let mut visit = |counts: &[usize]| {
            let mean: f64 = a.iter().zip(counts).map(|(ai, &k)| ai * k as f64).sum::<f64>() / r as f64;
            if (mean - target).abs() > slack {
                return;
            }
            let shift = (target - mean) / dir_norm;
            let y: Vec<f64> = counts
                .iter()
                .zip(&dir)
                .map(|(&k, di)| k as f64 / r as f64 + shift * di)
                .collect();
            if y.iter().any(|&v| v < 0.0) {
                return;
            }
            let h = entropy_of(&y);
            if best.as_ref().is_none_or(|(bh, _)| h > *bh) {
                best = Some((h, y));
            }
        };
        compositions(&mut counts, 1, r - k0, &mut visit);
        best
    };

    // Ties resolve to the smallest first coordinate, independent of `exec`.
    map_range(r + 1, exec, best_for_first)
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(f64, Vec<f64>)>, cand| match acc {
            Some(ref best) if best.0 >= cand.0 => acc,
            _ => Some(cand),
        })
        .map(|(_, y)| ClassicalState::new(y))
        .unwrap_or_else(|| {
            Err(Error::Oracle(format!(
                "no grid point within {slack} of mean {target} at resolution {r}"
            )))
        })
}

/// Visits every way of distributing `remaining` over `counts[pos..]`.
fn compositions(counts: &mut [usize], pos: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    if pos == counts.len() - 1 {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    for k in 0..=remaining {
        counts[pos] = k;
        compositions(counts, pos + 1, remaining - k, visit);
    }
}

/// `d = a − ā·1` and `⟨a|d⟩`: moving by `t·d` keeps the total mass and shifts
/// the mean by `t·⟨a|d⟩`.
fn mean_direction(a: &Observable) -> (Vec<f64>, f64) {
    let mean = a.uniform_mean();
    let dir: Vec<f64> = a.values().iter().map(|v| v - mean).collect();
    let norm = a.values().iter().zip(&dir).map(|(v, d)| v * d).sum();
    (dir, norm)
}

/// `λ = log((E − a_1)/(a_2 − E)) / (a_2 − a_1)` for two outcomes.
pub fn oracle_lambda_n2(p: &MaxEntProblem) -> Result<f64> {
    if p.len() != 2 {
        return Err(Error::Precondition(format!(
            "closed form needs exactly 2 outcomes, got {}",
            p.len()
        )));
    }
    p.require_interior()?;
    let a = p.observable().values();
    let e = p.target_mean();
    Ok(((e - a[0]) / (a[1] - e)).ln() / (a[1] - a[0]))
}

/// `count` random states with `|⟨a|x⟩ − E| <= 1e-9`, reproducible from `seed`.
///
/// Each sample is the point with mean `E` on the segment between a random
/// state pulled toward `e_1` (mean below `E`) and one pulled toward `e_n`
/// (mean above `E`). Rounding is removed by a final move along `a − ā·1`;
/// the rare sample that leaves the simplex there is redrawn.
pub fn constrained_sampler(p: &MaxEntProblem, count: usize, seed: u64) -> Result<Vec<ClassicalState>> {
    p.require_interior()?;
    if count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let a = p.observable();
    let target = p.target_mean();
    let (dir, dir_norm) = mean_direction(a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = count.saturating_mul(100).max(1000);
    let mut out = Vec::with_capacity(count);
    for _ in 0..budget {
        let low = pulled_sample(&mut rng, a, target, 0);
        let high = pulled_sample(&mut rng, a, target, a.len() - 1);
        let (ml, mh) = (mean_of(a, &low), mean_of(a, &high));
        let t = if mh > ml { ((target - ml) / (mh - ml)).clamp(0.0, 1.0) } else { 0.0 };
        let mut x: Vec<f64> = low.iter().zip(&high).map(|(l, h)| l + t * (h - l)).collect();
        let shift = (target - mean_of(a, &x)) / dir_norm;
        x.iter_mut().zip(&dir).for_each(|(xi, di)| *xi += shift * di);
        if x.iter().any(|&v| v < 0.0) {
            continue;
        }
        let Ok(state) = ClassicalState::new(x) else {
            continue;
        };
        if (mean_of(a, state.probs()) - target).abs() <= SAMPLE_TOLERANCE {
            out.push(state);
            if out.len() == count {
                return Ok(out);
            }
        }
    }
    Err(Error::Oracle(format!(
        "only {} of {count} feasible samples after {budget} draws",
        out.len()
    )))
}

fn mean_of(a: &Observable, x: &[f64]) -> f64 {
    a.values().iter().zip(x).map(|(ai, xi)| ai * xi).sum()
}

/// A uniform random state mixed with the vertex `e_vertex` just enough to
/// put its mean on the vertex's side of `target`, plus a random extra pull.
fn pulled_sample(rng: &mut impl Rng, a: &Observable, target: f64, vertex: usize) -> Vec<f64> {
    let n = a.len();
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let w: Vec<f64> = w.into_iter().map(|v| v / total).collect();
    let m = mean_of(a, &w);
    let apex = a.values()[vertex];
    let needed = if (m - target) * (apex - target) >= 0.0 {
        0.0
    } else {
        ((m - target) / (m - apex)).clamp(0.0, 1.0)
    };
    let u: f64 = rng.random();
    let s = needed + (1.0 - needed) * u * u;
    let mut x: Vec<f64> = w.iter().map(|v| v * (1.0 - s)).collect();
    x[vertex] += s;
    x
}
