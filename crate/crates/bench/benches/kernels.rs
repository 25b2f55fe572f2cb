use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use metagen::augment::{emit_program, mutate, MutationConfig};
use metagen::benchkit::eval_reconstruction;
use metagen::discretize::{extract_mesh, voxelize, VoxelGrid};
use metagen::frontend::{compile_program, examples, parse_program};
use metagen::homogenize::{homogenize, BaseMaterial};
use metagen_bench::{compile, pentamode, schwarz_p, sphere_program};

fn frontend(c: &mut Criterion) {
    c.bench_function("parse schwarz_p", |b| b.iter(|| parse_program(black_box(examples::SCHWARZ_P)).unwrap()));
    c.bench_function("compile pentamode", |b| {
        b.iter(|| compile_program(black_box(examples::PENTAMODE), &Default::default()).unwrap())
    });
}

fn geometry(c: &mut Criterion) {
    let schwarz = schwarz_p();
    let penta = pentamode();
    let field = schwarz.compile();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let points: Vec<Vector3<f64>> = (0..1000).map(|_| Vector3::new(rng.gen(), rng.gen(), rng.gen())).collect();
    c.bench_function("field eval 1k points", |b| b.iter(|| points.iter().map(|p| field.eval(p)).sum::<f64>()));

    let mut g = c.benchmark_group("discretize");
    g.sample_size(10);
    g.bench_function("voxelize schwarz_p R=32", |b| b.iter(|| voxelize(&schwarz, 32).unwrap()));
    g.bench_function("mesh pentamode R=32", |b| b.iter(|| extract_mesh(&penta, 32).unwrap()));
    g.finish();
}

fn physics(c: &mut Criterion) {
    let grid = voxelize(&compile(&sphere_program(0.6)), 12).unwrap();
    let mut g = c.benchmark_group("homogenize");
    g.sample_size(10);
    g.bench_function("sphere R=12", |b| b.iter(|| homogenize(&grid, &BaseMaterial::default()).unwrap()));
    g.finish();
}

fn tooling(c: &mut Criterion) {
    let a = VoxelGrid::from_fn(32, |i, j, k| (i * 7 + j * 3 + k) % 5 == 0);
    let b = a.shift([1, 2, 0]);
    c.bench_function("chamfer R=32", |bn| bn.iter(|| eval_reconstruction(&a, &b).unwrap()));

    let schwarz = schwarz_p();
    let mut seed = 0;
    c.bench_function("mutate and emit schwarz_p", |b| {
        b.iter(|| {
            seed += 1;
            if let Ok((child, _)) = mutate(&schwarz, &MutationConfig::with_seed(seed)) {
                black_box(emit_program(&child, None));
            }
        })
    });
}

criterion_group!(benches, frontend, geometry, physics, tooling);
criterion_main!(benches);
