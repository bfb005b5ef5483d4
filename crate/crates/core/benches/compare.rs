use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sepopt::harness::{compare, generate_corpus, CompareConfig, Execution, GeneratorSpec};

fn corpus_sweep(c: &mut Criterion) {
    let entries = generate_corpus(&GeneratorSpec {
        dims: vec![2, 4, 6],
        per_dim: 16,
        seed: 3,
        delta: 1e-3,
    })
    .expect("corpus");
    let mut group = c.benchmark_group("compare");
    group.sample_size(10);
    let mut modes = vec![("sequential", Execution::Sequential)];
    if cfg!(feature = "parallel") {
        modes.push(("parallel", Execution::Parallel));
    }
    for (name, execution) in modes {
        let cfg = CompareConfig {
            execution,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::new(name, entries.len()), &cfg, |b, cfg| {
            b.iter(|| compare(&entries, cfg))
        });
    }
    group.finish();
}

criterion_group!(benches, corpus_sweep);
criterion_main!(benches);
