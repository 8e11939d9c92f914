use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use deepssm::fit::{impulse_target, kernel_gradient};
use deepssm::sample::{random_model, stream, ModelSpec};
use deepssm::{kernel_closed_form, Recurrence};
use std::hint::black_box;

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel");
    for (depth, width) in [(1, 8), (2, 4), (3, 4), (4, 3)] {
        let model = random_model(&mut stream(0, 0), depth, width, ModelSpec::default());
        let id = format!("l{depth}_m{width}");
        group.bench_with_input(BenchmarkId::new("simulation", &id), &model, |b, m| {
            b.iter(|| m.kernel_by_simulation(black_box(64)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("closed_form", &id), &model, |b, m| {
            b.iter(|| kernel_closed_form(m, black_box(64)).unwrap())
        });
    }
    group.finish();
}

fn gradient(c: &mut Criterion) {
    let target = impulse_target(5, 64).unwrap().kernel;
    let mut group = c.benchmark_group("gradient");
    for (depth, width) in [(1, 7), (2, 4), (3, 3)] {
        let model = random_model(&mut stream(1, 0), depth, width, ModelSpec::default());
        group.bench_with_input(BenchmarkId::from_parameter(format!("l{depth}_m{width}")), &model, |b, m| {
            b.iter(|| kernel_gradient(m, &target).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernels, gradient);
criterion_main!(benches);
