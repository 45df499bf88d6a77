use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use netsync_bench::{absolute, lattice, relative, stochastic, walk};
use netsync_core::bounds::{aseb_direct, rseb_grounded};
use netsync_core::cdi::{
    cdi_exact, cdi_random_walk, cdi_series, infinite_lattice_cdi_numerical,
    lattice_return_probability, mean_rel_cdi,
};

fn factorization(c: &mut Criterion) {
    let mut g = c.benchmark_group("selected_inverse");
    for side in [20.0, 40.0, 60.0] {
        let (t, p) = lattice(side, 2.0, 1.0);
        let j = absolute(&t, &p);
        g.bench_with_input(
            BenchmarkId::new("aseb_lattice_r2", t.n_agents()),
            &j,
            |b, j| b.iter(|| aseb_direct(j).unwrap()),
        );
        let tm = walk(&j);
        g.bench_with_input(
            BenchmarkId::new("cdi_exact_lattice_r2", t.n_agents()),
            &tm,
            |b, tm| b.iter(|| cdi_exact(tm).unwrap()),
        );
    }
    let t = stochastic(30.0, 0.5, 3.0, 1);
    let j = relative(&t);
    g.bench_function(
        BenchmarkId::new("rseb_grounded_stochastic", t.n_agents()),
        |b| b.iter(|| rseb_grounded(&j).unwrap()),
    );
    g.bench_function(
        BenchmarkId::new("mean_rel_cdi_stochastic", t.n_agents()),
        |b| b.iter(|| mean_rel_cdi(&j).unwrap()),
    );
    g.finish();
}

fn series(c: &mut Criterion) {
    let (t, p) = lattice(10.0, 1.5, 1.0);
    let tm = walk(&absolute(&t, &p));
    c.bench_function("cdi_series_lattice_121", |b| {
        b.iter(|| cdi_series(&tm, 1e-8, 1_000_000).unwrap())
    });
}

fn lattice_spectral(c: &mut Criterion) {
    let mut g = c.benchmark_group("infinite_lattice");
    g.sample_size(10);
    for r in [4.0, 8.0] {
        g.bench_with_input(
            BenchmarkId::new("return_probability_n32", r),
            &r,
            |b, &r| b.iter(|| lattice_return_probability(32, r).unwrap()),
        );
        g.bench_with_input(BenchmarkId::new("numerical_cdi_np1", r), &r, |b, &r| {
            b.iter(|| infinite_lattice_cdi_numerical(r, 1.0, 1e-3).unwrap())
        });
    }
    g.finish();
}

fn random_walk(c: &mut Criterion) {
    let (t, p) = lattice(4.0, 1.0, 5.0);
    let mut g = c.benchmark_group("random_walk");
    g.sample_size(20);
    g.bench_function("lattice_5x5_10k_walks", |b| {
        b.iter(|| cdi_random_walk(&t, &p, 12, 10_000, None, 7).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    factorization,
    series,
    lattice_spectral,
    random_walk
);
criterion_main!(benches);
