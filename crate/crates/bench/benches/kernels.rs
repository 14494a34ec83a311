use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use hillfila_core::biot_savart::{elliptic_ke, ring_velocity_kernel, PatchRaster};
use hillfila_core::evolution::step_blobs;
use hillfila_core::scenario::hill_contour;
use hillfila_core::{
    make_scenario, HalfPlanePoint, ScenarioConfig, ScenarioKind, State, VorticitySource,
};

fn kernels(c: &mut Criterion) {
    c.bench_function("elliptic_ke", |b| b.iter(|| elliptic_ke(black_box(0.93))));
    c.bench_function("ring_velocity_kernel", |b| {
        b.iter(|| ring_velocity_kernel(black_box(0.7), black_box(0.4), black_box(0.25)))
    });
}

fn patch(c: &mut Criterion) {
    let ball = vec![hill_contour(1024).unwrap()];
    let mut g = c.benchmark_group("patch");
    g.sample_size(10);
    for (name, h) in [("raster 1/64", 1.0 / 64.0), ("raster 1/128", 1.0 / 128.0)] {
        g.bench_function(name, |b| {
            b.iter(|| PatchRaster::build(black_box(&ball), 1.0, h))
        });
    }
    let src = VorticitySource::patch(ball.clone(), 1.0, 1.0 / 64.0)
        .unwrap()
        .prepare();
    let targets: Vec<HalfPlanePoint> = (0..256)
        .map(|k| {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / 256.0;
            HalfPlanePoint::new(th.sin(), -th.cos())
        })
        .collect();
    g.bench_function("velocity batch, 256 boundary nodes at 1/64", |b| {
        b.iter(|| src.velocity_batch(black_box(&targets)))
    });
    g.finish();
}

fn blobs(c: &mut Criterion) {
    let mut cfg = ScenarioConfig::preset(ScenarioKind::SmoothHill);
    cfg.blob_spacing = 1.0 / 16.0;
    let State::Blobs(s) = make_scenario(&cfg).unwrap() else {
        unreachable!()
    };
    let mut g = c.benchmark_group("blobs");
    g.sample_size(10);
    g.bench_function("rk4 step, smooth hill at 1/16", |b| {
        b.iter_batched(|| s.clone(), |s| step_blobs(&s, 0.1), BatchSize::LargeInput)
    });
    g.finish();
}

criterion_group!(benches, kernels, patch, blobs);
criterion_main!(benches);
