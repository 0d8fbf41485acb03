use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qcqp_admm::{generate, AdmmEngine, Execution, GenSpec, SolverConfig};

fn bench_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("admm_100_iters");
    group.sample_size(10);
    for &(n, m) in &[(10usize, 5usize), (20, 20)] {
        let (inst, _) = generate(&GenSpec::new(n, m, true, 1)).expect("generate");
        for exec in [Execution::Sequential, Execution::Parallel] {
            let cfg = SolverConfig {
                execution: exec,
                ..SolverConfig::fixed(10.0, 100)
            };
            let engine = AdmmEngine::new(&inst, cfg).expect("engine");
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), format!("n{n}_m{m}")), &engine, |b, e| {
                b.iter(|| e.run().expect("run"))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_run);
criterion_main!(benches);
