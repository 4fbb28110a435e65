//! Polygonal curve geometry: points, knots, self-distance, thickness.

mod knot;
mod point;
mod segdist;
mod struts;

pub use knot::{min_radius_of_curvature, turning_angle, vertex_radius, Link, PolygonalKnot};
pub use point::{Point3, ORIGIN};
pub use segdist::segment_closest;
pub use struts::{
    critical_struts, critical_struts_brute, edge_list, link_vertex_radius,
    min_strut_distance, min_strut_distance_brute, rescale_to_unit_thickness, ropelength,
    ropelength_of_knot, thickness, thickness_of_knot, EdgeInfo, EdgeList, Governing,
    SpatialGrid, Strut, ThicknessBreakdown,
};
