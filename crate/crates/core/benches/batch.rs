use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maxent::{oracle_maxent_grid, solve_batch, Execution, GridSpec, MaxEntProblem, Observable, SolverConfig};

fn problems(count: usize, n: usize, seed: u64) -> Vec<MaxEntProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut a: Vec<f64> = Vec::with_capacity(n);
            let mut v = rng.random_range(-10.0..0.0);
            for _ in 0..n {
                a.push(v);
                v += rng.random_range(0.1..2.0);
            }
            let e = a[0] + (a[n - 1] - a[0]) * rng.random_range(0.02..0.98);
            MaxEntProblem::new(Observable::new(a).unwrap(), e).unwrap()
        })
        .collect()
}

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn bench_solve_batch(c: &mut Criterion) {
    let ps = problems(512, 16, 7);
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solve_batch");
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new(name, ps.len()), &ps, |b, ps| {
            b.iter(|| solve_batch(ps, &cfg, exec))
        });
    }
    group.finish();
}

fn bench_grid(c: &mut Criterion) {
    let p = MaxEntProblem::new(Observable::new(vec![0.0, 1.0, 2.5, 4.0]).unwrap(), 1.2).unwrap();
    let g = GridSpec::new(120, 4).unwrap();
    let mut group = c.benchmark_group("grid_oracle");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(name, |b| b.iter(|| oracle_maxent_grid(&p, &g, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_solve_batch, bench_grid);
criterion_main!(benches);
