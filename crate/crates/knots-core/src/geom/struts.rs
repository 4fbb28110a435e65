//! Self-distance of a polygonal curve union: struts, thickness, ropelength.
//!
//! A strut is a locally minimal self-distance, found as one of
//!
//! - a vertex-edge pair: the vertex is at least as close to that edge as to
//!   either chain neighbor of the edge (ties kept). Edges incident to the
//!   vertex count as zero-distance neighbors, which silently excludes all
//!   pairs along a smooth arc — otherwise a fine polygonal circle would
//!   look self-touching at the length of a couple of edges;
//! - an edge-edge pair whose closest approach is interior to both edges
//!   (mutually perpendicular contact);
//! - for parallel overlapping edges, the two point pairs at the ends of the
//!   overlap, which bound the flat contact valley between them.
//!
//! Membership in this census changes only where two candidate distances
//! cross, so the minimum over it — the doubly-critical self-distance — is a
//! continuous function of the vertex positions. That matters to the
//! tightener, whose feasibility floor would otherwise flicker at flat
//! contacts.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::knot::{min_radius_of_curvature, vertex_radius, Link, PolygonalKnot};
use crate::geom::point::Point3;

/// Relative slack for the vertex-edge neighbor comparison. Inclusive:
/// borderline pairs (e.g. a strut along a vertex angle bisector) count.
const CRITICAL_TOL: f64 = 1e-9;

/// Below this relative cross-product scale an edge pair is treated as the
/// parallel contact valley rather than a point contact.
const PARALLEL_TOL: f64 = 1e-12;

/// Flattened edge of a link, carrying its chain neighborhood.
#[derive(Debug, Clone, Copy)]
pub struct EdgeInfo {
    pub a: Point3,
    pub b: Point3,
    pub comp: usize,
    /// Edge index within its component.
    pub idx: usize,
    /// Global vertex ids of the endpoints (for gradient assembly).
    pub va: usize,
    pub vb: usize,
}

#[derive(Debug, Clone)]
pub struct EdgeList {
    pub edges: Vec<EdgeInfo>,
    /// Edge count per component, for adjacency tests.
    comp_sizes: Vec<usize>,
}

impl EdgeList {
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        let (e, f) = (&self.edges[i], &self.edges[j]);
        if e.comp != f.comp {
            return false;
        }
        let n = self.comp_sizes[e.comp];
        let d = (e.idx + n - f.idx) % n;
        d <= 1 || d == n - 1
    }

    /// Chain neighbor of edge `i` (`step` = -1 previous, +1 next), wrapping
    /// within its component.
    fn neighbor(&self, i: usize, step: isize) -> usize {
        let e = &self.edges[i];
        let n = self.comp_sizes[e.comp];
        let base = i - e.idx;
        base + (e.idx + n).wrapping_add_signed(step) % n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

pub fn edge_list(link: &Link) -> EdgeList {
    let mut edges = Vec::with_capacity(link.vertex_count());
    let mut comp_sizes = Vec::with_capacity(link.components.len());
    let mut vbase = 0;
    for (ci, comp) in link.components.iter().enumerate() {
        let n = comp.len();
        comp_sizes.push(n);
        for i in 0..n {
            edges.push(EdgeInfo {
                a: comp.vertex(i),
                b: comp.vertex((i + 1) % n),
                comp: ci,
                idx: i,
                va: vbase + i,
                vb: vbase + (i + 1) % n,
            });
        }
        vbase += n;
    }
    EdgeList { edges, comp_sizes }
}

/// A locally minimal self-distance between two non-adjacent edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strut {
    pub e1: usize,
    pub e2: usize,
    pub dist: f64,
    /// Closest-point parameters on edge e1 and e2.
    pub s: f64,
    pub t: f64,
}

/// Distance from `p` to segment `ab` and the clamped foot parameter.
fn point_segment(p: Point3, a: Point3, b: Point3) -> (f64, f64) {
    let u = b - a;
    let uu = u.dot(u);
    let t = if uu > 0.0 { ((p - a).dot(u) / uu).clamp(0.0, 1.0) } else { 0.0 };
    ((p - a.lerp(b, t)).norm(), t)
}

/// Vertex-edge census member: vertex `a` of edge `owner` against `target`.
/// Kept when the vertex is no farther from `target` than from either chain
/// neighbor of `target` (inclusive, with relative slack), so a vertex facing
/// a run of edges is charged to the nearest one(s). A neighbor incident to
/// the vertex sits at distance zero, which knocks out near-chain pairs.
fn vertex_edge_strut(el: &EdgeList, owner: usize, target: usize, cutoff: f64) -> Option<Strut> {
    let v = el.edges[owner].a;
    let f = &el.edges[target];
    let (dist, t) = point_segment(v, f.a, f.b);
    if dist > cutoff {
        return None;
    }
    let tol = CRITICAL_TOL * dist;
    for step in [-1, 1] {
        let g = &el.edges[el.neighbor(target, step)];
        let (dn, _) = point_segment(v, g.a, g.b);
        if dist > dn + tol {
            return None;
        }
    }
    Some(Strut { e1: owner, e2: target, dist, s: 0.0, t })
}

/// Edge-edge census members for one pair: a contact interior to both edges,
/// or for (anti)parallel edges the two point pairs bounding the overlap.
fn edge_edge_struts(el: &EdgeList, i: usize, j: usize, cutoff: f64, out: &mut Vec<Strut>) {
    let (e, f) = (&el.edges[i], &el.edges[j]);
    let u = e.b - e.a;
    let v = f.b - f.a;
    let w = e.a - f.a;
    let a = u.dot(u);
    let b = u.dot(v);
    let c = v.dot(v);
    let d = u.dot(w);
    let ee = v.dot(w);
    let denom = a * c - b * b;
    let push = |out: &mut Vec<Strut>, s: f64, t: f64| {
        let dist = (e.a.lerp(e.b, s) - f.a.lerp(f.b, t)).norm();
        if dist <= cutoff {
            out.push(Strut { e1: i, e2: j, dist, s, t });
        }
    };
    if denom > PARALLEL_TOL * a * c {
        let s = (b * ee - c * d) / denom;
        let t = (a * ee - b * d) / denom;
        if s > 1e-12 && s < 1.0 - 1e-12 && t > 1e-12 && t < 1.0 - 1e-12 {
            push(out, s, t);
        }
    } else if b != 0.0 {
        // Parallel within tolerance: the foot t(s) = (ee + b s)/c sweeps
        // linearly in s; the overlap is the s-range where it stays on f.
        let s0 = -ee / b;
        let s1 = (c - ee) / b;
        let lo = s0.min(s1).max(0.0);
        let hi = s0.max(s1).min(1.0);
        if lo <= hi {
            let t_at = |s: f64| ((ee + b * s) / c).clamp(0.0, 1.0);
            push(out, lo, t_at(lo));
            if hi - lo > 1e-12 {
                push(out, hi, t_at(hi));
            }
        }
    }
}

/// Append every census member of the non-adjacent pair (i, j) with distance
/// <= cutoff. Shared by the brute and grid enumerations so they agree bit
/// for bit.
fn emit_pair(el: &EdgeList, i: usize, j: usize, cutoff: f64, out: &mut Vec<Strut>) {
    edge_edge_struts(el, i, j, cutoff, out);
    if let Some(s) = vertex_edge_strut(el, i, j, cutoff) {
        out.push(s);
    }
    if let Some(s) = vertex_edge_strut(el, j, i, cutoff) {
        out.push(s);
    }
}

/// All struts with distance <= cutoff, by exhaustive pair enumeration.
pub fn critical_struts_brute(el: &EdgeList, cutoff: f64) -> Vec<Strut> {
    let mut out = Vec::new();
    for i in 0..el.len() {
        for j in (i + 1)..el.len() {
            if !el.adjacent(i, j) {
                emit_pair(el, i, j, cutoff, &mut out);
            }
        }
    }
    out
}

fn edge_aabb(e: &EdgeInfo) -> ([f64; 3], [f64; 3]) {
    (
        [e.a.x.min(e.b.x), e.a.y.min(e.b.y), e.a.z.min(e.b.z)],
        [e.a.x.max(e.b.x), e.a.y.max(e.b.y), e.a.z.max(e.b.z)],
    )
}

fn aabb_distance(lo1: [f64; 3], hi1: [f64; 3], lo2: [f64; 3], hi2: [f64; 3]) -> f64 {
    let mut sq = 0.0;
    for k in 0..3 {
        let gap = (lo2[k] - hi1[k]).max(lo1[k] - hi2[k]).max(0.0);
        sq += gap * gap;
    }
    sq.sqrt()
}

/// Uniform spatial grid over edge bounding boxes.
pub struct SpatialGrid {
    cell: f64,
    origin: Point3,
    map: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl SpatialGrid {
    pub fn build(el: &EdgeList, cell: f64) -> Self {
        let origin = el.edges.first().map(|e| e.a).unwrap_or_default();
        let mut map: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        let g = SpatialGridKey { cell, origin };
        for (id, e) in el.edges.iter().enumerate() {
            let (lo, hi) = edge_aabb(e);
            for key in g.cover(lo, hi) {
                map.entry(key).or_default().push(id as u32);
            }
        }
        SpatialGrid { cell, origin, map }
    }

    /// Candidate non-adjacent pairs whose exact distance might be <= cutoff.
    /// Conservative: never drops a pair at or below the cutoff.
    pub fn candidate_pairs(&self, el: &EdgeList, cutoff: f64) -> Vec<(usize, usize)> {
        let g = SpatialGridKey { cell: self.cell, origin: self.origin };
        let mut pairs = Vec::new();
        let inflate = cutoff * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        for (i, e) in el.edges.iter().enumerate() {
            let (lo, hi) = edge_aabb(e);
            let lo_q = [lo[0] - inflate, lo[1] - inflate, lo[2] - inflate];
            let hi_q = [hi[0] + inflate, hi[1] + inflate, hi[2] + inflate];
            for key in g.cover(lo_q, hi_q) {
                if let Some(ids) = self.map.get(&key) {
                    for &j in ids {
                        let j = j as usize;
                        if j > i && !el.adjacent(i, j) {
                            pairs.push((i, j));
                        }
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs.retain(|&(i, j)| {
            let (lo1, hi1) = edge_aabb(&el.edges[i]);
            let (lo2, hi2) = edge_aabb(&el.edges[j]);
            aabb_distance(lo1, hi1, lo2, hi2) <= inflate
        });
        pairs
    }
}

struct SpatialGridKey {
    cell: f64,
    origin: Point3,
}

impl SpatialGridKey {
    fn index(&self, x: f64, o: f64) -> i64 {
        ((x - o) / self.cell).floor() as i64
    }

    fn cover(&self, lo: [f64; 3], hi: [f64; 3]) -> impl Iterator<Item = (i64, i64, i64)> {
        let x0 = self.index(lo[0], self.origin.x);
        let x1 = self.index(hi[0], self.origin.x);
        let y0 = self.index(lo[1], self.origin.y);
        let y1 = self.index(hi[1], self.origin.y);
        let z0 = self.index(lo[2], self.origin.z);
        let z1 = self.index(hi[2], self.origin.z);
        (x0..=x1).flat_map(move |x| {
            (y0..=y1).flat_map(move |y| (z0..=z1).map(move |z| (x, y, z)))
        })
    }
}

/// All struts with distance <= cutoff using the spatial grid. Produces the
/// same struts as `critical_struts_brute` (sorted by edge pair).
pub fn critical_struts(el: &EdgeList, cutoff: f64) -> Vec<Strut> {
    if el.len() < 64 {
        return critical_struts_brute(el, cutoff);
    }
    let mean_edge: f64 =
        el.edges.iter().map(|e| (e.b - e.a).norm()).sum::<f64>() / el.len() as f64;
    let cell = cutoff.max(mean_edge).max(f64::MIN_POSITIVE);
    let grid = SpatialGrid::build(el, cell);
    let mut out = Vec::new();
    for (i, j) in grid.candidate_pairs(el, cutoff) {
        emit_pair(el, i, j, cutoff, &mut out);
    }
    out
}

fn min_of(struts: &[Strut]) -> f64 {
    struts.iter().map(|s| s.dist).fold(f64::INFINITY, f64::min)
}

/// Doubly-critical self-distance of the union, via the spatial grid with a
/// growing cutoff. Infinite when no strut exists (e.g. a triangle).
pub fn min_strut_distance(link: &Link) -> f64 {
    let el = edge_list(link);
    if el.len() < 64 {
        return min_of(&critical_struts_brute(&el, f64::INFINITY));
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for e in &el.edges {
        let (l, h) = edge_aabb(e);
        for k in 0..3 {
            lo[k] = lo[k].min(l[k]);
            hi[k] = hi[k].max(h[k]);
        }
    }
    let diameter = aabb_distance(hi, hi, lo, lo).max(1.0); // diagonal extent
    let mut cutoff = 4.0 * link.mean_edge_length();
    loop {
        let struts = critical_struts(&el, cutoff);
        let m = min_of(&struts);
        if m <= cutoff {
            return m;
        }
        if cutoff > diameter {
            return f64::INFINITY;
        }
        cutoff *= 2.0;
    }
}

/// Reference all-pairs implementation of `min_strut_distance`.
pub fn min_strut_distance_brute(link: &Link) -> f64 {
    let el = edge_list(link);
    min_of(&critical_struts_brute(&el, f64::INFINITY))
}

/// Which term of the thickness bound governs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Governing {
    /// Inscribed-circle radius at a vertex (component, vertex index).
    Curvature { component: usize, vertex: usize },
    /// Half of a strut length between two edges (component, edge index).
    Strut { e1: (usize, usize), e2: (usize, usize) },
}

#[derive(Debug, Clone, Copy)]
pub struct ThicknessBreakdown {
    pub min_rad: f64,
    /// Half the minimal strut length (infinite when strut-free).
    pub dcsd_half: f64,
    pub thickness: f64,
    pub governing: Governing,
}

pub fn thickness(link: &Link) -> ThicknessBreakdown {
    let mut min_rad = f64::INFINITY;
    let mut rad_at = (0, 0);
    for (ci, comp) in link.components.iter().enumerate() {
        let (r, v) = min_radius_of_curvature(comp);
        if r < min_rad {
            min_rad = r;
            rad_at = (ci, v);
        }
    }

    let el = edge_list(link);
    let struts = if el.len() < 64 {
        critical_struts_brute(&el, f64::INFINITY)
    } else {
        // Thickness only needs struts up to 2 * min_rad; anything longer
        // cannot govern. Grow the cutoff if the estimate was too small.
        let mut cutoff = 2.0 * min_rad.min(4.0 * link.mean_edge_length());
        loop {
            let s = critical_struts(&el, cutoff);
            if !s.is_empty() || cutoff >= 2.0 * min_rad {
                break s;
            }
            cutoff *= 2.0;
        }
    };

    let mut dcsd = f64::INFINITY;
    let mut strut_at = None;
    for s in &struts {
        if s.dist < dcsd {
            dcsd = s.dist;
            strut_at = Some((s.e1, s.e2));
        }
    }

    let dcsd_half = dcsd / 2.0;
    let (thick, governing) = if dcsd_half < min_rad {
        let (i, j) = strut_at.unwrap();
        let (e, f) = (&el.edges[i], &el.edges[j]);
        (
            dcsd_half,
            Governing::Strut { e1: (e.comp, e.idx), e2: (f.comp, f.idx) },
        )
    } else {
        (min_rad, Governing::Curvature { component: rad_at.0, vertex: rad_at.1 })
    };

    ThicknessBreakdown { min_rad, dcsd_half, thickness: thick, governing }
}

pub fn thickness_of_knot(knot: &PolygonalKnot) -> ThicknessBreakdown {
    thickness(&Link::single(knot.clone()))
}

/// Length divided by thickness. Errors when the curve has no positive-radius
/// embedded tube.
pub fn ropelength(link: &Link) -> Result<f64> {
    let t = thickness(link);
    if !(t.thickness > 0.0) || !t.thickness.is_finite() {
        return Err(Error::Infeasible(format!(
            "thickness {} does not admit a tube",
            t.thickness
        )));
    }
    Ok(link.total_length() / t.thickness)
}

pub fn ropelength_of_knot(knot: &PolygonalKnot) -> Result<f64> {
    ropelength(&Link::single(knot.clone()))
}

/// Convenience: scale about the centroid so thickness becomes exactly 1.
pub fn rescale_to_unit_thickness(link: &Link) -> Result<(Link, ThicknessBreakdown)> {
    let t = thickness(link);
    if !(t.thickness > 0.0) || !t.thickness.is_finite() {
        return Err(Error::Infeasible("cannot rescale a curve without a tube".into()));
    }
    let scaled = link.scaled_about(link.centroid(), 1.0 / t.thickness);
    let t2 = thickness(&scaled);
    Ok((scaled, t2))
}

/// `vertex_radius` exposed on links with flat vertex ids (component order).
pub fn link_vertex_radius(link: &Link, mut v: usize) -> f64 {
    for comp in &link.components {
        if v < comp.len() {
            return vertex_radius(comp, v);
        }
        v -= comp.len();
    }
    panic!("vertex id out of range");
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn regular_ngon(n: usize, circumradius: f64) -> PolygonalKnot {
        let verts = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                Point3::new(circumradius * t.cos(), circumradius * t.sin(), 0.0)
            })
            .collect();
        PolygonalKnot::new(verts).unwrap()
    }

    fn unit_edge_ngon(n: usize) -> PolygonalKnot {
        regular_ngon(n, 0.5 / (PI / n as f64).sin())
    }

    fn unit_square() -> PolygonalKnot {
        PolygonalKnot::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn square_strut_is_opposite_edge_distance() {
        let d = min_strut_distance(&Link::single(unit_square()));
        assert!((d - 1.0).abs() < 1e-15, "{d}");
    }

    #[test]
    fn hexagon_strut_is_opposite_edge_distance() {
        // Every vertex-edge pair loses its neighbor comparison (each vertex
        // is closer to some chain neighbor of the candidate edge), so only
        // the three antiparallel opposite-edge valleys remain, with ends at
        // the sqrt(3) vertex-vertex chords.
        let d = min_strut_distance(&Link::single(unit_edge_ngon(6)));
        assert!((d - 3f64.sqrt()).abs() < 1e-12, "{d}");
    }

    #[test]
    fn triangle_has_no_struts() {
        let d = min_strut_distance(&Link::single(unit_edge_ngon(3)));
        assert!(d.is_infinite());
    }

    #[test]
    fn hexagon_thickness_ties_curvature_and_strut() {
        let t = thickness(&Link::single(unit_edge_ngon(6)));
        let expect = 3f64.sqrt() / 2.0;
        assert!((t.min_rad - expect).abs() < 1e-12);
        assert!((t.dcsd_half - expect).abs() < 1e-12);
        assert!((t.thickness - expect).abs() < 1e-12);
    }

    #[test]
    fn ngon_ropelength_closed_form() {
        // Curvature governs (or ties) for every regular n-gon, so
        // ropelength = 2 n tan(pi / n).
        for n in 3..=64 {
            let rl = ropelength_of_knot(&unit_edge_ngon(n)).unwrap();
            let expect = 2.0 * n as f64 * (PI / n as f64).tan();
            assert!(
                (rl - expect).abs() <= 1e-12 * expect,
                "n={n}: {rl} vs {expect}"
            );
        }
    }

    #[test]
    fn ngon_ropelength_richardson_to_circle() {
        // Error above 2 pi decays like 1/n^2.
        let err = |n: usize| ropelength_of_knot(&unit_edge_ngon(n)).unwrap() - 2.0 * PI;
        let (e64, e128, e256) = (err(64), err(128), err(256));
        assert!(e64 > 0.0 && e128 > 0.0 && e256 > 0.0);
        assert!((e64 / e128 - 4.0).abs() < 0.1, "{}", e64 / e128);
        assert!((e128 / e256 - 4.0).abs() < 0.1, "{}", e128 / e256);
        assert!(e256 < 1e-3);
    }

    #[test]
    fn thickness_scales_linearly() {
        let hex = Link::single(unit_edge_ngon(6));
        let t1 = thickness(&hex).thickness;
        let t3 = thickness(&hex.scaled_about(Point3::default(), 3.0)).thickness;
        assert!((t3 - 3.0 * t1).abs() <= 1e-12 * t3);
        // Ropelength is scale invariant.
        let r1 = ropelength(&hex).unwrap();
        let r3 = ropelength(&hex.scaled_about(Point3::default(), 3.0)).unwrap();
        assert!((r1 - r3).abs() <= 1e-12 * r1);
    }

    #[test]
    fn rigid_motion_invariance() {
        let k = unit_edge_ngon(12);
        let (s, c) = (0.7f64.sin(), 0.7f64.cos());
        let moved = Link::single(k.map_vertices(|v| {
            Point3::new(
                c * v.x - s * v.z + 2.0,
                v.y - 7.0,
                s * v.x + c * v.z + 0.25,
            )
        }));
        let a = thickness(&Link::single(k)).thickness;
        let b = thickness(&moved).thickness;
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn grid_equals_brute_force_exactly() {
        // A 200-vertex closed curve with varied scale.
        let verts: Vec<Point3> = (0..200)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 200.0;
                Point3::new(
                    (t.cos() + 0.3 * (3.0 * t).cos()) * 4.0,
                    (t.sin() + 0.3 * (2.0 * t).sin()) * 4.0,
                    (5.0 * t).sin(),
                )
            })
            .collect();
        let link = Link::single(PolygonalKnot::new(verts).unwrap());
        let a = min_strut_distance(&link);
        let b = min_strut_distance_brute(&link);
        assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");

        // Strut sets below a cutoff agree pairwise too.
        let el = edge_list(&link);
        let cutoff = 2.0 * a;
        let mut fast = critical_struts(&el, cutoff);
        let mut slow = critical_struts_brute(&el, cutoff);
        let key = |s: &Strut| (s.e1, s.e2);
        fast.sort_by_key(key);
        slow.sort_by_key(key);
        assert_eq!(fast.len(), slow.len());
        for (f, s) in fast.iter().zip(&slow) {
            assert_eq!(f.dist.to_bits(), s.dist.to_bits());
            assert_eq!((f.e1, f.e2), (s.e1, s.e2));
        }
    }

    #[test]
    fn rescale_reaches_unit_thickness() {
        let link = Link::single(unit_edge_ngon(16));
        let (scaled, t) = rescale_to_unit_thickness(&link).unwrap();
        assert!((t.thickness - 1.0).abs() < 1e-12);
        let rl0 = ropelength(&link).unwrap();
        let rl1 = ropelength(&scaled).unwrap();
        assert!((rl0 - rl1).abs() <= 1e-12 * rl0);
    }

    #[test]
    fn two_component_struts_cross_components() {
        // Two parallel unit squares stacked 0.8 apart: the inter-component
        // gap governs.
        let sq = unit_square();
        let above = sq.map_vertices(|v| v + Point3::new(0.0, 0.0, 0.8));
        let link = Link::new(vec![sq, above]).unwrap();
        let d = min_strut_distance(&link);
        assert!((d - 0.8).abs() < 1e-12, "{d}");
        let t = thickness(&link);
        assert!((t.thickness - 0.4).abs() < 1e-12);
        assert!(matches!(t.governing, Governing::Strut { .. }));
    }

    #[test]
    fn parallel_overlap_yields_valley_end_struts() {
        // Two long rectangles, the top one lifted by 0.5 and shifted so the
        // facing edges overlap over x in [2, 10]. The flat contact valley is
        // reported through its two end point pairs, not a single arbitrary
        // interior point.
        let bottom = PolygonalKnot::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(10.0, 0.0, 0.0),
            Point3::new(10.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ])
        .unwrap();
        let top = bottom.map_vertices(|v| v + Point3::new(2.0, 0.0, 0.5));
        let link = Link::new(vec![bottom, top]).unwrap();
        let el = edge_list(&link);
        let facing: Vec<Strut> = critical_struts_brute(&el, 0.6)
            .into_iter()
            .filter(|s| (s.e1, s.e2) == (0, 4))
            .collect();
        assert_eq!(facing.len(), 2, "{facing:?}");
        for s in &facing {
            assert!((s.dist - 0.5).abs() < 1e-15, "{s:?}");
        }
        assert!((facing[0].s - 0.2).abs() < 1e-15 && facing[0].t.abs() < 1e-15);
        assert!((facing[1].s - 1.0).abs() < 1e-15 && (facing[1].t - 0.8).abs() < 1e-15);
    }

    #[test]
    fn hairpin_vertex_against_edge_is_a_strut() {
        // A nonconvex pentagon whose apex dips toward the interior of the
        // base edge: the contact is vertex-edge, invisible to interior-only
        // edge pair tests.
        let k = PolygonalKnot::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(4.0, 0.0, 0.0),
            Point3::new(4.0, 4.0, 0.0),
            Point3::new(2.0, 0.6, 0.0),
            Point3::new(0.0, 4.0, 0.0),
        ])
        .unwrap();
        let d = min_strut_distance(&Link::single(k));
        assert!((d - 0.6).abs() < 1e-15, "{d}");
    }

    #[test]
    fn intersecting_curve_has_zero_thickness() {
        // Figure-eight shaped flat curve crossing itself: struts at distance
        // ~0 appear; ropelength must refuse.
        let k = PolygonalKnot::new(vec![
            Point3::new(-1.0, -1.0, 0.0),
            Point3::new(1.0, 1.0, 1e-14),
            Point3::new(1.0, -1.0, 0.0),
            Point3::new(-1.0, 1.0, 1e-14),
        ])
        .unwrap();
        assert!(ropelength_of_knot(&k).is_err());
    }
}
