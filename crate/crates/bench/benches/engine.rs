use criterion::{black_box, criterion_group, criterion_main, Criterion};
use jetc_bench::{exp_setup, geometric_system};
use jetc_core::frobenius::{integrate, path_dependence};
use jetc_core::{is_zero, parse, simplify, JetSpace, ZeroConfig};

fn bench_symexpr(c: &mut Criterion) {
    let vars: Vec<String> = vec!["x1".into(), "x2".into(), "y".into(), "y_1".into()];
    let text = "(x1*y - y_1)^2 + sin(x1*x2)*exp(y/2) - 3/4*x2^3";
    c.bench_function("parse", |b| {
        b.iter(|| parse(black_box(text), black_box(&vars)).unwrap())
    });
    let e = parse(text, &vars).unwrap();
    c.bench_function("diff", |b| b.iter(|| black_box(&e).diff("y")));
    let d = e.diff("y").diff("x1");
    c.bench_function("simplify", |b| b.iter(|| simplify(black_box(&d))));
    c.bench_function("is_zero_sampled", |b| {
        let probe = parse("(x1 + y)^2 - x1^2 - 2*x1*y - y^2", &vars).unwrap();
        let cfg = ZeroConfig::default().with_samples(50);
        b.iter(|| is_zero(black_box(&probe), &cfg).unwrap())
    });
}

fn bench_curvature(c: &mut Criterion) {
    let conn = geometric_system(3, 2);
    c.bench_function("curvature_geometric_n3_m2", |b| {
        b.iter(|| black_box(&conn).curvature())
    });
    let space = JetSpace::new(4, 3, 2).unwrap();
    c.bench_function("enumerate_coordinates_n4_m3_k2", |b| {
        b.iter(|| black_box(&space).coordinates().len())
    });
}

fn bench_integration(c: &mut Criterion) {
    let (conn, init, grid) = exp_setup();
    c.bench_function("integrate_exp_51x51", |b| {
        b.iter(|| integrate(black_box(&conn), &init, &grid).unwrap())
    });
    c.bench_function("path_dependence_exp", |b| {
        b.iter(|| path_dependence(black_box(&conn), &init, &[1.0, 1.0], 0.02).unwrap())
    });
}

criterion_group!(benches, bench_symexpr, bench_curvature, bench_integration);
criterion_main!(benches);
