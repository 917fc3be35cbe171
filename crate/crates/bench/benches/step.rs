use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nonlocalflow::evolve::{Model, MuskatModel, PeskinModel, SchemeConfig};
use nonlocalflow::peskin::TensionLaw;
use nonlocalflow_bench::{muskat_state, peskin_state, SIZES};
use std::hint::black_box;

fn imex(c: &mut Criterion) {
    let mut g = c.benchmark_group("imex_step");
    g.sample_size(20);
    let cfg = SchemeConfig::imex(1e-3, 1.0);
    for n in SIZES {
        let f = muskat_state(n);
        let model = MuskatModel::new(1.0, &cfg, &f).unwrap();
        g.bench_with_input(BenchmarkId::new("muskat", n), &f, |b, f| {
            b.iter(|| model.step_imex(0.0, black_box(f), cfg.dt).unwrap())
        });
        let x = peskin_state(n);
        let model = PeskinModel::new(TensionLaw::power(1.5), &cfg, &x).unwrap();
        g.bench_with_input(BenchmarkId::new("peskin", n), &x, |b, x| {
            b.iter(|| model.step_imex(0.0, black_box(x), cfg.dt).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, imex);
criterion_main!(benches);
