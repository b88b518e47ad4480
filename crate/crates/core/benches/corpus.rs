//! Sequential vs parallel execution over a corpus: geometry + deficit per surface, and a
//! small amplitude sweep. Without the `parallel` feature both variants run sequentially.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};
use warplab::functionals::{DeficitEvaluator, Theorem};
use warplab::hypersurface::geometry_intrinsic;
use warplab::lab::Scenario;
use warplab::lab::catalog::{catalog_entry, corpus};
use warplab::lab::sweep::sweep;
use warplab::par::{self, Execution};
use warplab::spheregrid::SphereGrid;

fn deficits(c: &mut Criterion) {
    let e = catalog_entry("hyperbolic", 2).unwrap();
    let mut group = c.benchmark_group("corpus_deficits");
    group.sample_size(10);
    for res in [64usize, 128] {
        let grid = Arc::new(SphereGrid::axisym(2, res).unwrap());
        let surfaces = corpus(&grid, &e, 1, 32).unwrap();
        let ev = DeficitEvaluator::new(e.space.clone(), Theorem::T1).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), res), &surfaces, |b, s| {
                b.iter(|| {
                    par::map_jobs(exec, s, |surface| {
                        let f = geometry_intrinsic(surface).unwrap();
                        ev.evaluate(surface, &f).unwrap().epsilon
                    })
                })
            });
        }
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let sc = Scenario::from_toml("theorem = \"T1\"\nmodel = \"hyperbolic\"\nperturbation = [[2, 1.0]]\n").unwrap();
    let amps = [0.005, 0.01, 0.02, 0.04, 0.06, 0.08];
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| b.iter(|| black_box(sweep(&sc, &amps, Some(64), exec).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, deficits, sweeps);
criterion_main!(benches);
