use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use einbern::montecarlo::{trial_rng, trial_statistic};
use einbern::random::e_symmetric_tensor;
use einbern::{einstein_product, matricize, reference, sample_sum, sym_eig, Theorem};
use einbern_bench::{rng, symmetric_model, tensor_pair};

fn products(c: &mut Criterion) {
    let mut g = c.benchmark_group("einstein_product");
    for (m, d) in [(1, 8), (2, 3), (2, 4)] {
        let (a, b) = tensor_pair(m, d);
        let id = format!("m{m}_d{d}");
        g.bench_with_input(
            BenchmarkId::new("unfolded", &id),
            &(&a, &b),
            |bn, (a, b)| bn.iter(|| einstein_product(black_box(a), black_box(b)).unwrap()),
        );
        g.bench_with_input(
            BenchmarkId::new("nested_sums", &id),
            &(&a, &b),
            |bn, (a, b)| {
                bn.iter(|| reference::einstein_product(black_box(a), black_box(b)).unwrap())
            },
        );
    }
    g.finish();
}

fn eigensolver(c: &mut Criterion) {
    let mut g = c.benchmark_group("sym_eig");
    for (m, d) in [(1, 8), (2, 3), (2, 4)] {
        let f = matricize(&e_symmetric_tensor(m, d, &mut rng(3)).unwrap()).unwrap();
        g.bench_function(format!("n{}", f.rows()), |bn| {
            bn.iter(|| sym_eig(black_box(&f), 1e-12).unwrap())
        });
    }
    g.finish();
}

fn trials(c: &mut Criterion) {
    let model = symmetric_model(2, 2, 50);
    let mut k = 0u64;
    c.bench_function("trial_s42_50", |bn| {
        bn.iter(|| {
            k += 1;
            let y = sample_sum(&model, &mut trial_rng(7, k));
            trial_statistic(Theorem::Even, &y).unwrap()
        })
    });
}

criterion_group!(benches, products, eigensolver, trials);
criterion_main!(benches);
