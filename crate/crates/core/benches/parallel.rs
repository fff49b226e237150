//! Sequential against data-parallel execution of the hot kernels.
//!
//! cargo bench -p fockgen --bench parallel
//! Without the `parallel` feature both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fockgen::checks::{heisenberg_residual, random_hermitian};
use fockgen::fock::{build_fock, dgamma};
use fockgen::grid::{Basis, Grid, GridSpec};
use fockgen::onebody::OneBodyOp;
use fockgen::par::{set_execution, Execution};
use fockgen::states::{random_gaussian_states, TestRng};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn fock_assembly(c: &mut Criterion) {
    let grid = Grid::new(GridSpec::new(1, 32, 0.25, 1.0)).unwrap();
    let fock = build_fock(&grid, 2).unwrap();
    let mut rng = TestRng::new(7);
    let a = OneBodyOp::new(Basis::Momentum, random_hermitian(&mut rng, 32), "A").unwrap();
    let b = OneBodyOp::new(Basis::Momentum, random_hermitian(&mut rng, 32), "B").unwrap();
    let (da, db) = (dgamma(&fock, &a).unwrap(), dgamma(&fock, &b).unwrap());
    let mut group = c.benchmark_group("fock");
    for (name, policy) in POLICIES {
        set_execution(policy);
        group.bench_function(BenchmarkId::new("dgamma_assembly", name), |bench| {
            bench.iter(|| dgamma(&fock, black_box(&a)).unwrap())
        });
        group.bench_function(BenchmarkId::new("sparse_product", name), |bench| {
            bench.iter(|| black_box(&da).mul(black_box(&db)).unwrap())
        });
    }
    group.finish();
    set_execution(Execution::Parallel);
}

fn lattice_batches(c: &mut Criterion) {
    let mut group = c.benchmark_group("lattice");
    group.sample_size(20);
    for spec in [GridSpec::new(1, 256, 0.0625, 1.0), GridSpec::new(3, 16, 0.5, 1.0)] {
        let grid = Grid::new(spec).unwrap();
        let states = random_gaussian_states(&grid, 20, 7);
        let label = format!("n{}_N{}", spec.n, spec.points);
        for (name, policy) in POLICIES {
            set_execution(policy);
            group.bench_function(BenchmarkId::new(format!("heisenberg_states_{label}"), name), |bench| {
                bench.iter(|| heisenberg_residual(&grid, black_box(&states)))
            });
            group.bench_function(BenchmarkId::new(format!("fft_round_trip_{label}"), name), |bench| {
                bench.iter(|| {
                    let mut v = states[0].clone();
                    grid.inverse_in_place(&mut v);
                    grid.forward_in_place(&mut v);
                    v
                })
            });
        }
    }
    group.finish();
    set_execution(Execution::Parallel);
}

criterion_group!(benches, fock_assembly, lattice_batches);
criterion_main!(benches);
