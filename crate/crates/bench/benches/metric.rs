use criterion::{black_box, criterion_group, criterion_main, Criterion};
use protophon::{soundness_distance, FeatureSchema, Metric};
use protophon_bench::random_vectors;

fn metric(c: &mut Criterion) {
    let vs = random_vectors(1024, 1);
    let metric = Metric::default();
    c.bench_function("distance/1024 pairs", |b| {
        b.iter(|| vs.windows(2).map(|w| metric.distance(black_box(&w[0]), &w[1])).sum::<f64>())
    });
    let schema = FeatureSchema::standard();
    c.bench_function("soundness/1024", |b| {
        b.iter(|| vs.iter().map(|v| soundness_distance(black_box(v), schema)).sum::<f64>())
    });
}

criterion_group!(benches, metric);
criterion_main!(benches);
