use criterion::{black_box, criterion_group, criterion_main, Criterion};
use moran_core::theory::{self, TheoryParams};

fn z_of_t(c: &mut Criterion) {
    let p = TheoryParams::new(0.01, 1.0).unwrap();
    c.bench_function("z_of_t", |b| b.iter(|| theory::z_of_t(&p, black_box(5.0)).unwrap()));
}

fn c_integral(c: &mut Criterion) {
    let mut group = c.benchmark_group("c_integral");
    for s in [0.2, 1.0, 1e4] {
        let p = TheoryParams::new(0.01, s).unwrap();
        group.bench_function(format!("s={s}"), |b| {
            b.iter(|| theory::c_integral(&p, black_box(1.0)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, z_of_t, c_integral);
criterion_main!(benches);
