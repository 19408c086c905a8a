use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mixnorm::harness::{run_chain_campaign_with, default_slab_grids};
use mixnorm::mixed::mixed_norm_with;
use mixnorm::{Exec, GridFunction, SpaceSpec};

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn mixed_norm(c: &mut Criterion) {
    let f = GridFunction::from_fn(2, 512, |x| {
        let r = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
        r.max(1e-3).powf(-0.4)
    })
    .unwrap();
    let x = SpaceSpec::lorentz(2.0, 1.0).unwrap();
    let mut g = c.benchmark_group("mixed_norm_512x512");
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| mixed_norm_with(&f, &x, e).unwrap().total)
        });
    }
    g.finish();
}

fn chain(c: &mut Criterion) {
    let mut g = c.benchmark_group("chain_p1.5_n2");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| run_chain_campaign_with(1.5, 2, &[64, 128, 256], &default_slab_grids(2), 0.15, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, mixed_norm, chain);
criterion_main!(benches);
