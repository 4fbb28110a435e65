//! Space writhe and average crossing number of closed polygonal curves.
//!
//! Both are Gauss double integrals over pairs of segments. For straight
//! segments the writhe integrand's numerator (t1 x t2) . (r1 - r2) is
//! constant over the pair, so each pair contributes a signed solid angle
//! with a closed form and the average-crossing-number contribution is its
//! absolute value. Pairs that nearly touch are routed to adaptive
//! Gauss-Legendre quadrature of the same integrand.

use std::f64::consts::PI;

use crate::geom::{Point3, PolygonalKnot};

/// Fraction of the mean edge length below which a pair's minimum distance
/// sends it to the quadrature fallback.
const NEAR_SINGULAR_FRACTION: f64 = 1e-7;

/// Signed solid angle of the spherical triangle with unit-vector corners.
/// atan2 form: stable for thin triangles (no error amplification near zero).
fn spherical_triangle(a: Point3, b: Point3, c: Point3) -> f64 {
    2.0 * f64::atan2(
        a.dot(b.cross(c)),
        1.0 + a.dot(b) + b.dot(c) + c.dot(a),
    )
}

/// Writhe contribution of the ordered segment pair (p1->p2, p3->p4): the
/// Gauss integral over both segments divided by 4*pi. Exact closed form: the
/// pair's Gauss map covers a spherical quadrilateral whose corners are the
/// directions between segment endpoints; its signed area is the integral.
pub fn writhe_pair(p1: Point3, p2: Point3, p3: Point3, p4: Point3) -> f64 {
    let r12 = p2 - p1;
    let r34 = p4 - p3;
    let r13 = p3 - p1;
    // Constant numerator of the integrand; exactly zero for coplanar pairs.
    if r34.cross(r12).dot(r13) == 0.0 {
        return 0.0;
    }

    let u1 = r13.normalized();
    let u2 = (p4 - p1).normalized();
    let u3 = (p4 - p2).normalized();
    let u4 = (p3 - p2).normalized();
    if u1 == Point3::default()
        || u2 == Point3::default()
        || u3 == Point3::default()
        || u4 == Point3::default()
    {
        // Segments share an endpoint; the corner directions degenerate.
        return writhe_pair_quadrature(p1, p2, p3, p4);
    }

    let omega = spherical_triangle(u1, u4, u3) + spherical_triangle(u1, u3, u2);
    omega / (4.0 * PI)
}

/// Same contribution by adaptive tensor-product Gauss-Legendre quadrature.
/// Serves as the independent oracle and as the near-singular fallback.
pub fn writhe_pair_quadrature(p1: Point3, p2: Point3, p3: Point3, p4: Point3) -> f64 {
    let e1 = p2 - p1;
    let e2 = p4 - p3;
    // (e1 x e2) . (x - y) is independent of the points chosen on the pair.
    let c = e1.cross(e2).dot(p1 - p3);
    if c == 0.0 {
        return 0.0;
    }
    let inv_cube = |s: f64, t: f64| {
        let x = p1 + e1 * s;
        let y = p3 + e2 * t;
        let d2 = (x - y).norm_sq();
        1.0 / (d2 * d2.sqrt())
    };
    let integral = adaptive_gl2(&inv_cube, 0.0, 1.0, 0.0, 1.0, 1e-12, 24);
    c * integral / (4.0 * PI)
}

/// Nodes and weights of the 8-point Gauss-Legendre rule on [-1, 1].
const GL8_X: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.5255324099163290,
    -0.1834346424956498,
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_W: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.3626837833783620,
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

fn gl2(f: &impl Fn(f64, f64) -> f64, s0: f64, s1: f64, t0: f64, t1: f64) -> f64 {
    let (hs, ht) = ((s1 - s0) / 2.0, (t1 - t0) / 2.0);
    let (cs, ct) = ((s1 + s0) / 2.0, (t1 + t0) / 2.0);
    let mut acc = 0.0;
    for i in 0..8 {
        let s = cs + hs * GL8_X[i];
        let mut row = 0.0;
        for j in 0..8 {
            row += GL8_W[j] * f(s, ct + ht * GL8_X[j]);
        }
        acc += GL8_W[i] * row;
    }
    acc * hs * ht
}

fn adaptive_gl2(
    f: &impl Fn(f64, f64) -> f64,
    s0: f64,
    s1: f64,
    t0: f64,
    t1: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let whole = gl2(f, s0, s1, t0, t1);
    let (sm, tm) = ((s0 + s1) / 2.0, (t0 + t1) / 2.0);
    let split = gl2(f, s0, sm, t0, tm)
        + gl2(f, sm, s1, t0, tm)
        + gl2(f, s0, sm, tm, t1)
        + gl2(f, sm, s1, tm, t1);
    if depth == 0 || (whole - split).abs() <= tol * (1.0 + split.abs()) {
        return split;
    }
    let tol = tol / 2.0;
    adaptive_gl2(f, s0, sm, t0, tm, tol, depth - 1)
        + adaptive_gl2(f, sm, s1, t0, tm, tol, depth - 1)
        + adaptive_gl2(f, s0, sm, tm, t1, tol, depth - 1)
        + adaptive_gl2(f, sm, s1, tm, t1, tol, depth - 1)
}

fn min_pair_distance(p1: Point3, p2: Point3, p3: Point3, p4: Point3) -> f64 {
    crate::geom::segment_closest(p1, p2, p3, p4).0
}

fn pair_term(knot: &PolygonalKnot, i: usize, j: usize, near: f64) -> f64 {
    let (a1, b1) = knot.edge(i);
    let (a2, b2) = knot.edge(j);
    if min_pair_distance(a1, b1, a2, b2) < near {
        writhe_pair_quadrature(a1, b1, a2, b2)
    } else {
        writhe_pair(a1, b1, a2, b2)
    }
}

fn adjacent(n: usize, i: usize, j: usize) -> bool {
    let d = (j + n - i) % n;
    d <= 1 || d == n - 1
}

/// Space writhe: sum of the Gauss integral over all ordered segment pairs.
/// Adjacent pairs are coplanar and contribute zero. Deterministic summation
/// order (lexicographic over pairs).
pub fn space_writhe(knot: &PolygonalKnot) -> f64 {
    let n = knot.len();
    let near = NEAR_SINGULAR_FRACTION * knot.mean_edge_length();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent(n, i, j) {
                continue;
            }
            acc += 2.0 * pair_term(knot, i, j, near);
        }
    }
    acc
}

/// Average crossing number: same double integral with the integrand's
/// absolute value. For straight segment pairs the integrand has constant
/// sign, so each pair contributes |writhe term|.
pub fn average_crossing_number(knot: &PolygonalKnot) -> f64 {
    let n = knot.len();
    let near = NEAR_SINGULAR_FRACTION * knot.mean_edge_length();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent(n, i, j) {
                continue;
            }
            acc += 2.0 * pair_term(knot, i, j, near).abs();
        }
    }
    acc
}

/// Gauss linking number of two disjoint closed curves: the double integral
/// over all cross-component segment pairs. Returns a float that should sit
/// within rounding of an integer for genuinely disjoint curves.
pub fn linking_number(a: &PolygonalKnot, b: &PolygonalKnot) -> f64 {
    let near = NEAR_SINGULAR_FRACTION * 0.5 * (a.mean_edge_length() + b.mean_edge_length());
    let mut acc = 0.0;
    for i in 0..a.len() {
        let (a1, b1) = a.edge(i);
        for j in 0..b.len() {
            let (a2, b2) = b.edge(j);
            acc += if min_pair_distance(a1, b1, a2, b2) < near {
                writhe_pair_quadrature(a1, b1, a2, b2)
            } else {
                writhe_pair(a1, b1, a2, b2)
            };
        }
    }
    acc
}

/// Writhe and ACN in one sweep (shared pair terms).
pub fn writhe_and_acn(knot: &PolygonalKnot) -> (f64, f64) {
    let n = knot.len();
    let near = NEAR_SINGULAR_FRACTION * knot.mean_edge_length();
    let (mut wr, mut acn) = (0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent(n, i, j) {
                continue;
            }
            let t = 2.0 * pair_term(knot, i, j, near);
            wr += t;
            acn += t.abs();
        }
    }
    (wr, acn)
}
