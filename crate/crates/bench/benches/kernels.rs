use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use siegel_core::eisenstein::{eisenstein_sum, EisensteinSpec};
use siegel_core::invariants::{chi_invariant_g2, delta_invariant_g1};
use siegel_core::iwasawa::{from_coords, to_coords};
use siegel_core::quadrature::integrate_1d;
use siegel_core::spectral::{laplace_beltrami, DEFAULT_STEP};
use siegel_core::symplectic::random_point;
use siegel_core::IwasawaCoords;
use std::hint::black_box;

fn iwasawa(c: &mut Criterion) {
    let mut group = c.benchmark_group("iwasawa_roundtrip");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for g in 1..=4 {
        let tau = random_point(g, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(g), &tau, |b, tau| {
            b.iter(|| from_coords(&to_coords(black_box(tau)).unwrap()))
        });
    }
    group.finish();
}

fn eisenstein(c: &mut Criterion) {
    let mut group = c.benchmark_group("eisenstein_sum");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (g, s, radius) in [(1, 3.0, 50.0), (2, 3.5, 8.0)] {
        let tau = random_point(g, &mut rng);
        let spec = EisensteinSpec::real(g, s, radius).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(g), &tau, |b, tau| {
            b.iter(|| eisenstein_sum(black_box(tau), &spec).unwrap())
        });
    }
    group.finish();
}

fn invariants(c: &mut Criterion) {
    let z = Complex64::new(0.13, 0.9);
    c.bench_function("delta_g1", |b| b.iter(|| delta_invariant_g1(black_box(z))));
    let tau = random_point(2, &mut ChaCha8Rng::seed_from_u64(2));
    c.bench_function("chi_g2", |b| b.iter(|| chi_invariant_g2(black_box(&tau)).unwrap()));
}

fn kernels(c: &mut Criterion) {
    c.bench_function("gauss_legendre_1d", |b| {
        b.iter(|| integrate_1d(|x| (x * x).exp(), 0.0, 1.0, black_box(24), 4))
    });
    let coords = IwasawaCoords::random(2, &mut ChaCha8Rng::seed_from_u64(3));
    let f = |x: &[f64]| x[0].powf(3.5) * x[1].sqrt();
    c.bench_function("laplace_beltrami_g2", |b| {
        b.iter(|| laplace_beltrami(&f, black_box(&coords), DEFAULT_STEP).unwrap())
    });
}

criterion_group!(benches, iwasawa, eisenstein, invariants, kernels);
criterion_main!(benches);
