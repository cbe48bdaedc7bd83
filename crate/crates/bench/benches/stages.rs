use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rsimex::explicit::explicit_rhs;
use rsimex::implicit::implicit_stage;
use rsimex::linsolve::gmres;
use rsimex_bench::Workload;

const SIZES: [usize; 2] = [32, 64];

fn explicit(c: &mut Criterion) {
    let mut g = c.benchmark_group("explicit_rhs");
    for n in SIZES {
        let w = Workload::bubble(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &w, |b, w| {
            b.iter(|| explicit_rhs(&w.case.initial, &w.explicit, &w.case.eos).unwrap())
        });
    }
    g.finish();
}

fn implicit(c: &mut Criterion) {
    let mut g = c.benchmark_group("implicit_stage");
    g.sample_size(20);
    for n in SIZES {
        let w = Workload::bubble(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &w, |b, w| {
            b.iter(|| implicit_stage(&w.star, &w.case.initial, w.dt, &w.rs, &w.case.eos, &w.implicit).unwrap())
        });
    }
    g.finish();
}

fn linear(c: &mut Criterion) {
    let mut g = c.benchmark_group("gmres");
    for n in SIZES {
        let w = Workload::bubble(n).unwrap();
        let sys = w.energy_system().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &sys, |b, s| {
            b.iter(|| gmres(&s.matrix, &s.rhs, &s.x0, &w.implicit.gmres).unwrap())
        });
    }
    g.finish();
}

criterion_group!(stages, explicit, implicit, linear);
criterion_main!(stages);
