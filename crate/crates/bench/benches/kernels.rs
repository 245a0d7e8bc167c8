//! Microbenchmarks for the numerical hot paths: Kronecker products,
//! Hermitian eigendecomposition, the central-node measurement, one batch of
//! SDP solver iterations, and operator-word canonicalization.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use ghznet_core::kernel::{herm_eig, kron, ComplexMatrix};
use ghznet_core::npa::{solve, SdpProblem, SolverOptions, Word};
use ghznet_core::qstates::TiltAngle;
use ghznet_core::starnet::{apply_gsm, build_star};

fn dense_hermitian(dim: usize) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(dim, dim, |i, j| {
        num_complex::Complex64::new(
            ((i * 31 + j * 17) % 13) as f64 / 13.0,
            (i as f64 - j as f64) / dim as f64,
        )
    });
    m.add(&m.dagger()).scale_re(0.5)
}

fn bench_kron(c: &mut Criterion) {
    let a = dense_hermitian(8);
    let b = dense_hermitian(8);
    c.bench_function("kron_8x8", |bench| {
        bench.iter(|| kron(black_box(&a), black_box(&b)))
    });
}

fn bench_herm_eig(c: &mut Criterion) {
    let m = dense_hermitian(16);
    c.bench_function("herm_eig_16", |bench| {
        bench.iter(|| herm_eig(black_box(&m)).unwrap())
    });
}

fn bench_apply_gsm(c: &mut Criterion) {
    let theta = TiltAngle::new(std::f64::consts::FRAC_PI_6).unwrap();
    let net = build_star(4, theta).unwrap();
    c.bench_function("apply_gsm_n4", |bench| {
        bench.iter(|| apply_gsm(black_box(&net)).unwrap())
    });
}

fn bench_sdp_iterations(c: &mut Criterion) {
    let problem = SdpProblem::build(0.05).unwrap();
    let opts = SolverOptions {
        max_iter: 100,
        tol_primal: 0.0,
        tol_dual: 0.0,
        ..Default::default()
    };
    c.bench_function("sdp_100_iterations", |bench| {
        bench.iter(|| solve(black_box(&problem), &opts, None).unwrap())
    });
}

fn bench_word_reduce(c: &mut Criterion) {
    let a0 = Word::letter(0, 0);
    let a1 = Word::letter(0, 1);
    let b0 = Word::letter(1, 0);
    let c1 = Word::letter(2, 1);
    let long = a0.mul(&a1).mul(&b0).mul(&c1).mul(&a1).mul(&a0).mul(&b0);
    c.bench_function("word_mul_canonical", |bench| {
        bench.iter(|| black_box(&long).mul(black_box(&a1)).canonical())
    });
}

criterion_group!(
    benches,
    bench_kron,
    bench_herm_eig,
    bench_apply_gsm,
    bench_sdp_iterations,
    bench_word_reduce
);
criterion_main!(benches);
