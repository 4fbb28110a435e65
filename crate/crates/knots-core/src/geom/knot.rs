//! Closed polygonal curves and unions of them.

use crate::error::{Error, Result};
use crate::geom::point::Point3;

/// A closed polygonal curve: vertex i connects to vertex (i+1) mod n.
///
/// Invariants: at least 3 vertices, all coordinates finite, no two consecutive
/// vertices coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalKnot {
    vertices: Vec<Point3>,
    pub label: Option<String>,
}

impl PolygonalKnot {
    pub fn new(vertices: Vec<Point3>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidKnot(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidKnot(format!("vertex {i} is not finite")));
            }
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::InvalidKnot(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        Ok(PolygonalKnot { vertices, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertex(&self, i: usize) -> Point3 {
        self.vertices[i % self.vertices.len()]
    }

    /// Edge i runs from vertex i to vertex i+1 (cyclic).
    pub fn edge(&self, i: usize) -> (Point3, Point3) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edge_vec(&self, i: usize) -> Point3 {
        let (a, b) = self.edge(i);
        b - a
    }

    pub fn total_length(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|i| self.edge_vec(i).norm()).sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.total_length() / self.vertices.len() as f64
    }

    pub fn centroid(&self) -> Point3 {
        let mut c = Point3::default();
        for v in &self.vertices {
            c += *v;
        }
        c / self.vertices.len() as f64
    }

    pub fn translated(&self, t: Point3) -> Self {
        self.map_vertices(|v| v + t)
    }

    pub fn scaled_about(&self, center: Point3, s: f64) -> Self {
        self.map_vertices(|v| center + (v - center) * s)
    }

    pub fn map_vertices(&self, f: impl Fn(Point3) -> Point3) -> Self {
        PolygonalKnot {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            label: self.label.clone(),
        }
    }

    /// Replace vertex positions, keeping the label. Counts must match.
    pub fn with_vertices(&self, vertices: Vec<Point3>) -> Result<Self> {
        let mut k = PolygonalKnot::new(vertices)?;
        k.label = self.label.clone();
        Ok(k)
    }
}

/// A disjoint union of closed polygonal curves (a polygonal link).
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub components: Vec<PolygonalKnot>,
}

impl Link {
    pub fn new(components: Vec<PolygonalKnot>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidKnot("link has no components".into()));
        }
        Ok(Link { components })
    }

    pub fn single(knot: PolygonalKnot) -> Self {
        Link { components: vec![knot] }
    }

    pub fn total_length(&self) -> f64 {
        self.components.iter().map(|c| c.total_length()).sum()
    }

    pub fn vertex_count(&self) -> usize {
        self.components.iter().map(|c| c.len()).sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.total_length() / self.vertex_count() as f64
    }

    pub fn centroid(&self) -> Point3 {
        let mut c = Point3::default();
        for comp in &self.components {
            for v in comp.vertices() {
                c += *v;
            }
        }
        c / self.vertex_count() as f64
    }

    pub fn scaled_about(&self, center: Point3, s: f64) -> Self {
        Link {
            components: self.components.iter().map(|c| c.scaled_about(center, s)).collect(),
        }
    }

    pub fn translated(&self, t: Point3) -> Self {
        Link {
            components: self.components.iter().map(|c| c.translated(t)).collect(),
        }
    }
}

/// Turning angle at vertex i: the exterior angle between incoming and
/// outgoing edges, in [0, pi]. Computed via atan2 for stability near 0.
pub fn turning_angle(knot: &PolygonalKnot, i: usize) -> f64 {
    let n = knot.len();
    let a = knot.vertex((i + n - 1) % n);
    let b = knot.vertex(i);
    let c = knot.vertex((i + 1) % n);
    let u = (b - a).normalized();
    let v = (c - b).normalized();
    u.cross(v).norm().atan2(u.dot(v))
}

/// Radius of the circle inscribed at vertex i: min(adjacent edge lengths) /
/// (2 tan(theta/2)) with theta the turning angle. Infinite where edges are
/// collinear.
pub fn vertex_radius(knot: &PolygonalKnot, i: usize) -> f64 {
    let n = knot.len();
    let a = knot.vertex((i + n - 1) % n);
    let b = knot.vertex(i);
    let c = knot.vertex((i + 1) % n);
    let e_in = (b - a).norm();
    let e_out = (c - b).norm();
    let theta = turning_angle(knot, i);
    let t = (theta / 2.0).tan();
    if t <= 0.0 {
        f64::INFINITY
    } else {
        e_in.min(e_out) / (2.0 * t)
    }
}

/// Minimum over all vertices of `vertex_radius`, with the governing vertex.
pub fn min_radius_of_curvature(knot: &PolygonalKnot) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for i in 0..knot.len() {
        let r = vertex_radius(knot, i);
        if r < best {
            best = r;
            arg = i;
        }
    }
    (best, arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    pub fn regular_ngon(n: usize, circumradius: f64) -> PolygonalKnot {
        let verts = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                Point3::new(circumradius * t.cos(), circumradius * t.sin(), 0.0)
            })
            .collect();
        PolygonalKnot::new(verts).unwrap()
    }

    #[test]
    fn rejects_degenerate() {
        assert!(PolygonalKnot::new(vec![Point3::new(0.0, 0.0, 0.0); 3]).is_err());
        assert!(PolygonalKnot::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
        ])
        .is_err());
    }

    #[test]
    fn unit_square_length() {
        let sq = PolygonalKnot::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ])
        .unwrap();
        assert!((sq.total_length() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn hexagon_length_and_vertex_radius() {
        // Unit edges: circumradius 1.
        let hex = regular_ngon(6, 1.0);
        assert!((hex.total_length() - 6.0).abs() < 1e-12);
        // r = 1 / (2 tan(pi/6)) = sqrt(3)/2.
        let (r, _) = min_radius_of_curvature(&hex);
        assert!((r - 3f64.sqrt() / 2.0).abs() < 1e-12, "r = {r}");
    }

    #[test]
    fn ngon_closed_form_radius() {
        for n in 3..=64 {
            let edge = 2.0 * (PI / n as f64).sin(); // circumradius 1
            let expect = edge / (2.0 * (PI / n as f64).tan());
            let (r, _) = min_radius_of_curvature(&regular_ngon(n, 1.0));
            assert!(
                (r - expect).abs() <= 1e-12 * expect,
                "n={n}: {r} vs {expect}"
            );
        }
    }

    #[test]
    fn length_scales_linearly() {
        let hex = regular_ngon(6, 1.0);
        let doubled = hex.scaled_about(Point3::default(), 2.0);
        assert!((doubled.total_length() - 2.0 * hex.total_length()).abs() < 1e-12);
    }
}
