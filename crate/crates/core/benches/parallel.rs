use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use exotic_core::embedding::{embed_fock, lemma1_check, CoefficientArray, ExoticFock};
use exotic_core::exotic_basis::{check_c1, ExoticFrame, FrameSpec};
use exotic_core::graded_space::{GradedVector, WeightFamily};
use exotic_core::laplacians::exotic_laplacian_at;
use exotic_core::par::with_threads;
use exotic_core::symmetric_tensor::SymTensor;
use exotic_core::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn pools() -> Vec<(&'static str, usize)> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![("sequential", 1), ("pool", all)]
}

fn cesaro_c1(c: &mut Criterion) {
    let frame = ExoticFrame::with_default_weights(FrameSpec {
        a: 1.0,
        k_a: 5,
        m_terms: 100_000,
    })
    .unwrap();
    let mut g = c.benchmark_group("check_c1");
    g.sample_size(10);
    for (name, threads) in pools() {
        g.bench_function(BenchmarkId::new(name, threads), |b| {
            b.iter(|| {
                with_threads(threads, || {
                    check_c1(black_box(&frame), 100_000, 1e-12).unwrap()
                })
            })
        });
    }
    g.finish();
}

fn exotic_laplacian(c: &mut Criterion) {
    let m = 10_000;
    let frame = ExoticFrame::with_default_weights(FrameSpec {
        a: 1.0,
        k_a: 50,
        m_terms: m,
    })
    .unwrap();
    let mut f2 = SymTensor::zeros(2, 50).unwrap();
    f2.set(&[0, 0], Complex64::new(1.0, 0.0));
    let phi = ExoticFock::from_coefficients(
        50,
        vec![
            CoefficientArray::zeros(0, 50).unwrap(),
            CoefficientArray::zeros(1, 50).unwrap(),
            CoefficientArray::new(f2),
        ],
    )
    .unwrap();
    let big = embed_fock(&phi, &frame).unwrap();
    let xi = GradedVector::new(
        (0..m)
            .map(|i| Complex64::new(0.5 / (i + 1) as f64, 0.0))
            .collect(),
    );
    let mut g = c.benchmark_group("exotic_laplacian_at");
    g.sample_size(10);
    for (name, threads) in pools() {
        g.bench_function(BenchmarkId::new(name, threads), |b| {
            b.iter(|| {
                with_threads(threads, || {
                    exotic_laplacian_at(&big, black_box(&xi), 1.0, &[100, 1000, m]).unwrap()
                })
            })
        });
    }
    g.finish();
}

fn lemma(c: &mut Criterion) {
    let m = 2000;
    let frame = ExoticFrame::with_default_weights(FrameSpec {
        a: 1.0,
        k_a: 5,
        m_terms: m,
    })
    .unwrap();
    let base = WeightFamily::default_family(m).unwrap();
    let b = CoefficientArray::random(&mut ChaCha8Rng::seed_from_u64(1), 4, 5).unwrap();
    let mut g = c.benchmark_group("lemma1_check");
    for (name, threads) in pools() {
        g.bench_function(BenchmarkId::new(name, threads), |bch| {
            bch.iter(|| {
                with_threads(threads, || {
                    lemma1_check(black_box(&b), &frame, 1.0, &base).unwrap()
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, cesaro_c1, exotic_laplacian, lemma);
criterion_main!(benches);
