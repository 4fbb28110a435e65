use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use knots_core::geom::{
    critical_struts, critical_struts_brute, edge_list, min_strut_distance, segment_closest,
    thickness, Link, Point3, PolygonalKnot,
};
use knots_core::invariants::{average_crossing_number, space_writhe};
use knots_core::io::FourierKnotSpec;
use knots_core::tighten::{tighten_link, TighteningConfig};
use knots_core::topology::knot_determinant;

fn trefoil(n: usize) -> PolygonalKnot {
    FourierKnotSpec::trefoil().sample(n).unwrap()
}

fn invariants(c: &mut Criterion) {
    let knot = trefoil(192);
    c.bench_function("space_writhe/192", |b| {
        b.iter(|| space_writhe(black_box(&knot)))
    });
    c.bench_function("acn/192", |b| {
        b.iter(|| average_crossing_number(black_box(&knot)))
    });
}

fn self_distance(c: &mut Criterion) {
    let mut group = c.benchmark_group("critical_struts");
    for n in [96usize, 256, 512] {
        let link = Link::single(trefoil(n));
        let el = edge_list(&link);
        let cutoff = 2.0 * min_strut_distance(&link);
        group.bench_with_input(BenchmarkId::new("grid", n), &n, |b, _| {
            b.iter(|| critical_struts(black_box(&el), black_box(cutoff)))
        });
        group.bench_with_input(BenchmarkId::new("brute", n), &n, |b, _| {
            b.iter(|| critical_struts_brute(black_box(&el), black_box(cutoff)))
        });
    }
    group.finish();

    let link = Link::single(trefoil(256));
    c.bench_function("thickness/256", |b| b.iter(|| thickness(black_box(&link))));
}

fn segment_distance(c: &mut Criterion) {
    // A spread of relative poses, including near-parallel ones.
    let pairs: Vec<(Point3, Point3, Point3, Point3)> = (0..64)
        .map(|i| {
            let a = i as f64 * 0.37;
            (
                Point3::new(a.sin(), a.cos(), 0.1 * a),
                Point3::new(a.cos() + 1.0, a.sin(), 0.1 * a + 0.3),
                Point3::new(-a.sin(), 0.5 * a.cos(), 1.0),
                Point3::new(a.sin() + 0.01 * a, 0.5 * a.cos() + 1.0, 1.2),
            )
        })
        .collect();
    c.bench_function("segment_closest/64", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for &(p1, q1, p2, q2) in &pairs {
                acc += segment_closest(p1, q1, p2, q2).0;
            }
            black_box(acc)
        })
    });
}

fn tighten_step(c: &mut Criterion) {
    let link = Link::single(trefoil(96));
    let cfg = TighteningConfig {
        phase1_max_steps: 1,
        phase1_residual_target: 1e-300,
        phase2_max_steps: 0,
        ..TighteningConfig::default()
    };
    c.bench_function("tighten_step/96", |b| {
        b.iter(|| tighten_link(black_box(&link), black_box(&cfg)).unwrap())
    });
}

fn determinant(c: &mut Criterion) {
    let knot = trefoil(64);
    c.bench_function("determinant/trefoil64", |b| {
        b.iter(|| knot_determinant(black_box(&knot), 0).unwrap())
    });
}

criterion_group!(
    benches,
    invariants,
    self_distance,
    segment_distance,
    tighten_step,
    determinant
);
criterion_main!(benches);
