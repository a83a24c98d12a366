use std::hint::black_box;

use cheeger_bench::{graph, sphere, torus};
use cheeger_core::cheeger::{cheeger_exact, cheeger_sweep, LocalRatioMeter};
use cheeger_core::manifold::geodesic_distance;
use cheeger_core::riccati::{psi_closed_form, ComparisonParams, Rk4};
use cheeger_core::spectral::{lambda1, SolverConfig};
use cheeger_core::tube::{level_profile, signed_distance, ProfileSide};
use cheeger_core::Domain;
use criterion::{criterion_group, criterion_main, Criterion};

fn riccati(c: &mut Criterion) {
    let p = ComparisonParams::new(3, 0.5, -1.0).unwrap();
    c.bench_function("riccati/closed_form", |b| {
        b.iter(|| psi_closed_form(black_box(&p), black_box(0.3)))
    });
    let rk = Rk4::new(&p, 1e-5).unwrap();
    c.bench_function("riccati/rk4_1e4_steps", |b| {
        b.iter(|| (0..10_000).fold(black_box(p.h), |y, _| rk.advance(y)))
    });
}

fn manifold(c: &mut Criterion) {
    let (mesh, cut) = sphere(4);
    c.bench_function("manifold/cotan_laplacian_ico4", |b| {
        b.iter(|| black_box(&mesh).laplacian())
    });
    let seeds = mesh.interface_vertices(&cut);
    c.bench_function("manifold/geodesic_distance_ico4", |b| {
        b.iter(|| geodesic_distance(&mesh, black_box(&seeds)))
    });
    let (tmesh, tcut) = torus(32);
    let mut meter = LocalRatioMeter::new(&tmesh, &tcut, 0.0).unwrap();
    let x = tmesh.interface_vertices(&tcut)[0];
    c.bench_function("cheeger/local_ratio_torus32", |b| {
        b.iter(|| meter.ratio(black_box(x), 0.3))
    });
}

fn spectral(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral");
    g.sample_size(10);
    let solver = SolverConfig::default();
    let (dense, _) = sphere(2);
    let lap = dense.laplacian();
    g.bench_function("lambda1_dense_ico2", |b| b.iter(|| lambda1(black_box(&lap), &solver)));
    let (sparse, _) = sphere(4);
    let lap = sparse.laplacian();
    g.bench_function("lambda1_lanczos_ico4", |b| b.iter(|| lambda1(black_box(&lap), &solver)));
    let v = lambda1(&lap, &solver).unwrap().eigenvector;
    g.bench_function("sweep_ico4", |b| b.iter(|| cheeger_sweep(&sparse, black_box(&v))));
    g.finish();
}

fn cuts_and_tubes(c: &mut Criterion) {
    let gr = graph(12, 1);
    c.bench_function("cheeger/exact_12_vertices", |b| {
        b.iter(|| cheeger_exact(black_box(&gr)))
    });
    let (mesh, cut) = sphere(4);
    c.bench_function("tube/signed_distance_ico4", |b| {
        b.iter(|| signed_distance(&mesh, black_box(&cut)))
    });
    let field = signed_distance(&mesh, &cut).unwrap();
    c.bench_function("tube/level_profile_ico4", |b| {
        b.iter(|| level_profile(&mesh, black_box(&field), 32, ProfileSide::Positive))
    });
}

criterion_group!(benches, riccati, manifold, spectral, cuts_and_tubes);
criterion_main!(benches);
