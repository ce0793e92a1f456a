use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hydro_balance::exec::{self, Execution};
use hydro_balance::instances::{random_day_ahead, rng, InstanceShape};
use hydro_balance::milp::{solve_day_ahead, SolveOptions};

fn batch(c: &mut Criterion) {
    let shape = InstanceShape {
        plants: 2,
        steps: 12,
        segments: 3,
    };
    let mut r = rng(5);
    let problems: Vec<_> = (0..32).map(|_| random_day_ahead(&mut r, shape)).collect();
    let opts = SolveOptions::default();
    let mut g = c.benchmark_group("day_ahead_batch");
    g.sample_size(10);
    let modes: &[(&str, Execution)] = &[
        #[cfg(feature = "parallel")]
        ("parallel", Execution::Parallel),
        ("sequential", Execution::Sequential),
    ];
    for &(name, mode) in modes {
        g.bench_with_input(
            BenchmarkId::new(name, problems.len()),
            &problems,
            |b, ps| {
                b.iter(|| exec::map(mode, ps, |p| solve_day_ahead(p, &opts).map(|s| s.objective)))
            },
        );
    }
    g.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
