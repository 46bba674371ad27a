use criterion::{criterion_group, criterion_main, Criterion};

use complab_core::deficiency::deficiency_estimate;
use complab_core::flow::{escape_time, null_branch_init, FlowControls, NullBranch};
use complab_core::frobenius::{expand_operator, frobenius_series, indicial_equation, Side};
use complab_core::gallery;
use complab_core::lorentz::{geodesic_integrate, CotangentState, GeodesicControls};
use num_complex::Complex64 as C;

fn bench_classify(c: &mut Criterion) {
    c.bench_function("classify quartic zero with drift", |b| {
        let a = gallery::e5().a().clone();
        let drift = gallery::e5().b().clone();
        b.iter(|| {
            let op = complab_core::SturmLiouvilleOperator::new(a.clone(), drift.clone())
                .expect("valid operator");
            std::hint::black_box(op.report())
        })
    });
}

fn bench_frobenius(c: &mut Criterion) {
    c.bench_function("frobenius basis at degenerate zero", |b| {
        let op = gallery::e4();
        b.iter(|| {
            let ode = expand_operator(&op, 0.0, Side::Right, C::i(), 28).unwrap();
            let eq = indicial_equation(&ode).unwrap();
            let s1 = frobenius_series(&ode, eq.roots[0], 20).unwrap();
            let s2 = frobenius_series(&ode, eq.roots[1], 20).unwrap();
            std::hint::black_box((s1, s2))
        })
    });
}

fn bench_flow_escape(c: &mut Criterion) {
    c.bench_function("graph-branch escape time", |b| {
        let op = gallery::e1();
        let controls = FlowControls::default();
        b.iter(|| {
            let init = null_branch_init(&op, 0.2, NullBranch::Graph).unwrap();
            std::hint::black_box(escape_time(&op, init, &controls).unwrap())
        })
    });
}

fn bench_deficiency(c: &mut Criterion) {
    c.bench_function("deficiency estimate of oscillatory operator", |b| {
        let op = gallery::e3();
        b.iter(|| std::hint::black_box(deficiency_estimate(&op).unwrap()))
    });
}

fn bench_geodesic(c: &mut Criterion) {
    c.bench_function("axis null geodesic", |b| {
        let model = gallery::clifton_pohl();
        let controls = GeodesicControls::default();
        let init = CotangentState {
            x: 1.0,
            y: 0.0,
            xi: 0.0,
            eta: 1.0,
        };
        b.iter(|| std::hint::black_box(geodesic_integrate(&model, init, &controls).unwrap()))
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = bench_classify, bench_frobenius, bench_flow_escape, bench_deficiency, bench_geodesic
}
criterion_main!(kernels);
