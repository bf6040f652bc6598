use criterion::{black_box, criterion_group, criterion_main, Criterion};
use hodgeheat::h2::{h2_k0, QUAD_TOL};
use hodgeheat::spectral::heat_kernel_matrix;
use hodgeheat::torus::{torus_k0, TorusPoint, DEFAULT_TRUNC};
use hodgeheat::SpectralData;
use hodgeheat_bench::{fixture_dec, fixture_spectrum};

fn discrete(c: &mut Criterion) {
    for name in ["tetra", "ico2", "torus8"] {
        let dec = fixture_dec(name);
        c.bench_function(&format!("eigen_{name}_k1"), |b| {
            b.iter(|| SpectralData::from_dec(black_box(&dec), 1).unwrap())
        });
        let s = fixture_spectrum(name, 1);
        c.bench_function(&format!("heat_kernel_{name}_k1"), |b| {
            b.iter(|| heat_kernel_matrix(black_box(&s), 0.1).unwrap())
        });
    }
}

fn analytic(c: &mut Criterion) {
    let x = TorusPoint::new(0.1, 0.7);
    let y = TorusPoint::new(0.45, 0.2);
    c.bench_function("torus_k0", |b| b.iter(|| torus_k0(black_box(x), black_box(y), 0.05, DEFAULT_TRUNC).unwrap()));
    c.bench_function("h2_k0", |b| b.iter(|| h2_k0(black_box(1.0), 0.5, QUAD_TOL).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = discrete, analytic
}
criterion_main!(benches);
