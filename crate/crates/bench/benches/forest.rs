use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mrf_core::forest::split::best_split_medoid;
use mrf_core::simgen::{generate_replicate, Scenario, ScenarioConfig, SpaceKind, SphereScenario, WarpingScenario};
use mrf_core::{distance_matrix, fit, ForestConfig, SplitRule};

fn sphere_data(n: usize, d: usize) -> mrf_core::simgen::Replicate<mrf_core::spaces::SpherePoint> {
    generate_replicate(&SphereScenario::default(), &ScenarioConfig::new(SpaceKind::Sphere, n, d, 1)).unwrap()
}

fn distance_matrices(c: &mut Criterion) {
    let mut group = c.benchmark_group("distance_matrix");
    for n in [100, 400] {
        let rep = sphere_data(n, 2);
        let space = SphereScenario::default().space();
        group.bench_with_input(BenchmarkId::new("sphere", n), &rep.train.y, |b, y| {
            b.iter(|| distance_matrix(&space, black_box(y)).unwrap())
        });
    }
    let sc = WarpingScenario::default();
    let rep = generate_replicate(&sc, &ScenarioConfig::new(SpaceKind::Warping, 100, 2, 1)).unwrap();
    let space = sc.space();
    group.bench_function("warping/100", |b| b.iter(|| distance_matrix(&space, black_box(&rep.train.y)).unwrap()));
    group.finish();
}

fn medoid_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("medoid_split");
    let space = SphereScenario::default().space();
    for m in [50, 200, 800] {
        let rep = sphere_data(m, 5);
        let dm = distance_matrix(&space, &rep.train.y).unwrap();
        let cell: Vec<usize> = (0..m).collect();
        let features: Vec<usize> = (0..5).collect();
        let cons = ForestConfig::default().constraints();
        group.bench_with_input(BenchmarkId::from_parameter(m), &cell, |b, cell| {
            b.iter(|| best_split_medoid(black_box(cell), &rep.train.x, &features, &dm, cons))
        });
    }
    group.finish();
}

fn forest_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_warping");
    group.sample_size(10);
    let sc = WarpingScenario::default();
    let rep = generate_replicate(&sc, &ScenarioConfig::new(SpaceKind::Warping, 50, 5, 1)).unwrap();
    for rule in [SplitRule::Medoid, SplitRule::TwoMeans] {
        let config = ForestConfig { n_trees: 50, split_rule: rule, ..ForestConfig::default() };
        group.bench_function(rule.as_str(), |b| {
            b.iter(|| fit(Arc::new(sc.space()), rep.train.x.clone(), rep.train.y.clone(), &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, distance_matrices, medoid_sweep, forest_fit);
criterion_main!(benches);
