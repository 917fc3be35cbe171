use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nonlocalflow::muskat::{rhs_original, rhs_reformulated, DEFAULT_REFINE as MUSKAT_REFINE};
use nonlocalflow::peskin::{rhs_contour, rhs_split, TensionLaw, DEFAULT_REFINE as PESKIN_REFINE};
use nonlocalflow_bench::{muskat_state, peskin_state, SIZES};
use std::hint::black_box;

fn muskat(c: &mut Criterion) {
    let mut g = c.benchmark_group("muskat_rhs");
    g.sample_size(20);
    for n in SIZES {
        let f = muskat_state(n);
        g.bench_with_input(BenchmarkId::new("reformulated", n), &f, |b, f| {
            b.iter(|| rhs_reformulated(black_box(f), 1.0, MUSKAT_REFINE).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("original", n), &f, |b, f| {
            b.iter(|| rhs_original(black_box(f), 1.0, MUSKAT_REFINE).unwrap())
        });
    }
    g.finish();
}

fn peskin(c: &mut Criterion) {
    let law = TensionLaw::power(1.5);
    let mut g = c.benchmark_group("peskin_rhs");
    g.sample_size(20);
    for n in SIZES {
        let x = peskin_state(n);
        g.bench_with_input(BenchmarkId::new("contour", n), &x, |b, x| {
            b.iter(|| rhs_contour(black_box(x), &law, PESKIN_REFINE).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("split", n), &x, |b, x| {
            b.iter(|| rhs_split(black_box(x), &law, PESKIN_REFINE).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, muskat, peskin);
criterion_main!(benches);
