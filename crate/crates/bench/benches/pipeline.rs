use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use occloc_bench::highway;
use occloc_core::camera::{panel_footprint_at, raster::rasterize_convex};
use occloc_core::config::{ExperimentSpec, SweepParameter};
use occloc_core::sim::{run_pipeline, sweep};
use occloc_core::{CameraIntrinsics, LedPanelSpec};

fn rasterize(c: &mut Criterion) {
    let intr = CameraIntrinsics::from_sensor(0.025, 0.036, 0.024, 10.0);
    let panel = LedPanelSpec::default();
    let mut group = c.benchmark_group("footprint");
    for d in [5.0, 20.0, 80.0] {
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            b.iter(|| panel_footprint_at(&panel, black_box(d), (2000.3, 1300.7), &intr))
        });
    }
    group.finish();

    let quad = [(10.2, 11.7), (410.9, 30.1), (380.4, 290.6), (25.5, 260.0)];
    c.bench_function("rasterize_quad_400px", |b| {
        b.iter(|| rasterize_convex(black_box(&quad), 4000, 3000))
    });
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(20);
    for seconds in [2.0, 10.0] {
        let cfg = highway(seconds);
        group.throughput(Throughput::Elements(cfg.frame_count()));
        group.bench_with_input(BenchmarkId::new("frames", cfg.frame_count()), &cfg, |b, cfg| {
            b.iter(|| run_pipeline(black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for p in [SweepParameter::Resolution, SweepParameter::Sinr] {
        let mut spec = ExperimentSpec::preset(p);
        spec.trials = 2;
        group.bench_function(p.name(), |b| b.iter(|| sweep(black_box(&spec)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, rasterize, pipeline, sweeps);
criterion_main!(benches);
