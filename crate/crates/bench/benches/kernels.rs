use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use ipdg_bench::sipg0_fixture;
use ipdg_core::krylov::{pcg, random_vector};
use ipdg_core::mesh::build_hierarchy;
use ipdg_core::precond::{bpx, two_level, SmootherSpec};
use ipdg_core::split::SplitBasis;
use ipdg_core::{DgProblem, MethodParams, Variant};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    for level in [2, 3] {
        let h = build_hierarchy(level);
        let p = DgProblem::with_epsilon(h.finest(), 1e-3).unwrap();
        for (name, params) in
            [("ip0", MethodParams::sipg0(8.0)), ("ip1", MethodParams::new(-1, 8.0, Variant::Ip1).unwrap())]
        {
            g.bench_with_input(BenchmarkId::new(name, level), &params, |b, params| {
                b.iter(|| black_box(p.assemble(params)))
            });
        }
    }
    g.finish();
}

fn split(c: &mut Criterion) {
    let h = build_hierarchy(3);
    let p = DgProblem::with_epsilon(h.finest(), 1e-3).unwrap();
    let params = MethodParams::sipg0(8.0);
    let a = p.assemble(&params);
    let basis = SplitBasis::new(p.mesh, &p.weights);
    c.bench_function("split/extract_blocks/3", |b| b.iter(|| black_box(basis.extract_blocks(&a, &params).unwrap())));
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("pcg");
    g.sample_size(10);
    for level in [2, 3] {
        let (h, blocks) = sipg0_fixture(level, 1e-5);
        let rhs = random_vector(blocks.n_v(), 1);
        let tl = two_level(&blocks.vv, &h, 1, SmootherSpec::default()).unwrap();
        let bp = bpx(&blocks.vv, &h, SmootherSpec::default()).unwrap();
        g.bench_with_input(BenchmarkId::new("two-level", level), &level, |b, _| {
            b.iter(|| black_box(pcg(&blocks.vv, &rhs, &tl, 1e-7, 500).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("bpx", level), &level, |b, _| {
            b.iter(|| black_box(pcg(&blocks.vv, &rhs, &bp, 1e-7, 500).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, assembly, split, solve);
criterion_main!(benches);
