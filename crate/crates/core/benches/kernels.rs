//! Kernel timings. Bench ids do not name the backend, so a run with
//! `--no-default-features` can be compared against a saved parallel baseline.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use willmore_core::curvature::{CurvatureBundle, HeightField};
use willmore_core::flow::{step_semi_implicit, FlowState, StepSolver};
use willmore_core::grid::{build_grids, GridAtlas};
use willmore_core::operator::OperatorSplit;
use willmore_core::surface::{make_sphere, make_torus};

fn torus(n: usize) -> (GridAtlas, Vec<f64>) {
    let atlas = build_grids(&make_torus(2.0, 1.0).unwrap(), n).unwrap();
    let rho = atlas.sample(|_, uv| 0.05 * uv[1].cos() + 0.02 * (2.0 * uv[0]).sin());
    (atlas, rho)
}

fn sphere(n: usize) -> (GridAtlas, Vec<f64>) {
    let atlas = build_grids(&make_sphere(1.0).unwrap(), n).unwrap();
    let rho = atlas.sample(|id, uv| {
        let z = atlas.surface.chart(id).map.position(uv)[2];
        0.025 * (3.0 * z * z - 1.0)
    });
    (atlas, rho)
}

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("curvature_bundle");
    for n in [64, 128] {
        let (atlas, rho) = torus(n);
        group.bench_with_input(BenchmarkId::new("torus", n), &n, |b, _| {
            b.iter(|| {
                let height = HeightField::discrete(&atlas, black_box(&rho)).unwrap();
                CurvatureBundle::build(&atlas, &height).unwrap()
            })
        });
    }
    group.finish();
}

fn operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("operator");
    group.sample_size(20);
    for n in [32, 64] {
        let (atlas, rho) = torus(n);
        let height = HeightField::discrete(&atlas, &rho).unwrap();
        let bundle = CurvatureBundle::build(&atlas, &height).unwrap();
        group.bench_with_input(BenchmarkId::new("split_build", n), &n, |b, _| {
            b.iter(|| OperatorSplit::build(&atlas, &bundle, &height).unwrap())
        });
        let split = OperatorSplit::build(&atlas, &bundle, &height).unwrap();
        group.bench_with_input(BenchmarkId::new("stiff_apply", n), &n, |b, _| b.iter(|| split.apply_stiff(black_box(&rho))));
    }
    group.finish();
}

fn flow_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow_step");
    group.sample_size(10);
    for n in [24, 32] {
        let (atlas, rho) = sphere(n);
        let state = FlowState::new(&atlas, 0.0, 1e-3, &rho).unwrap();
        group.bench_with_input(BenchmarkId::new("sphere", n), &n, |b, _| {
            let mut solver = StepSolver::new();
            b.iter(|| step_semi_implicit(&atlas, &state, &mut solver).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, curvature, operator, flow_step);
criterion_main!(benches);
