//! Geometric invariants of polygonal knots and links.
//!
//! Overview
//! --------
//! - `geom`: thickness (inscribed-radius and strut bounds) and ropelength of
//!   closed polygonal curves, with an exact all-pairs path and a spatial-grid
//!   path that agree bit for bit.
//! - `invariants`: space writhe and average crossing number by exact
//!   per-segment-pair solid angles, with an adaptive quadrature fallback.
//! - `tighten`: constrained ropelength descent (projected gradient with
//!   active struts and curvature constraints), plus a repulsive preprocessor
//!   and an equal-chord resampler.
//! - `topology`: generic projection to a crossing diagram and the knot
//!   determinant via an exact integer Goeritz matrix.
//! - `analysis`: writhe quantization sweeps, residuals, correlations,
//!   scaling-law fits, and distribution moments.
//! - `io`: coordinate file formats, Fourier knot sampling, a linked-chain
//!   generator, record tables, and a resumable batch runner.
//!
//! Determinism: all floating-point reductions run in a fixed order; repeated
//! runs on identical inputs produce bit-identical outputs.

#![deny(unsafe_code)]

pub mod analysis;
pub mod error;
pub mod geom;
pub mod invariants;
pub mod io;
#[cfg(test)]
pub mod testutil;
pub mod tighten;
pub mod topology;

pub use error::{Error, Result};
pub use geom::{Link, Point3, PolygonalKnot};
