//! Shared generators for tests: closed curves with known topology and a
//! small deterministic RNG.

use std::f64::consts::PI;

use crate::geom::{Point3, PolygonalKnot};

/// Trefoil from low-order harmonics: x = sin t + 2 sin 2t,
/// y = cos t - 2 cos 2t, z = -sin 3t, sampled at n points.
pub fn harmonic_trefoil(n: usize) -> PolygonalKnot {
    let verts = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            Point3::new(
                t.sin() + 2.0 * (2.0 * t).sin(),
                t.cos() - 2.0 * (2.0 * t).cos(),
                -(3.0 * t).sin(),
            )
        })
        .collect();
    PolygonalKnot::new(verts).unwrap()
}

/// Figure-eight knot on a torus: ((2 + cos 2t) cos 3t, (2 + cos 2t) sin 3t,
/// sin 4t), sampled at n points.
pub fn harmonic_figure_eight(n: usize) -> PolygonalKnot {
    let verts = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            Point3::new(
                (2.0 + (2.0 * t).cos()) * (3.0 * t).cos(),
                (2.0 + (2.0 * t).cos()) * (3.0 * t).sin(),
                (4.0 * t).sin(),
            )
        })
        .collect();
    PolygonalKnot::new(verts).unwrap()
}

/// Planar regular n-gon of circumradius 1 in the xy-plane.
pub fn regular_ngon(n: usize) -> PolygonalKnot {
    let verts = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            Point3::new(t.cos(), t.sin(), 0.0)
        })
        .collect();
    PolygonalKnot::new(verts).unwrap()
}

/// Minimal LCG returning f64 in [-1, 1); good enough for test fixtures.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    pub fn point(&mut self) -> Point3 {
        Point3::new(self.next_f64(), self.next_f64(), self.next_f64())
    }
}
