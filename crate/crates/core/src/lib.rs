//! Numerical stable/unstable manifolds of hyperbolic planar maps.
//!
//! The crate is organised around the graph transform: local unstable and
//! stable manifolds are computed as fixed points of a contraction acting on
//! spectrally sampled graphs over `[-1, 1]`. Around that core sit the
//! machinery for periodic orbits of general maps (adapted metrics and
//! charts), and the two classical hyperbolic examples: geodesic flows on
//! negatively curved surfaces and dispersing billiards.

pub mod billiard;
pub mod error;
pub mod geoflow;
pub mod graphtransform;
pub mod hypmap;
pub mod numcore;

pub use error::{Direction, Error, Result};

/// Points and tangent vectors of the plane.
pub type Vec2 = nalgebra::Vector2<f64>;
/// Linear maps of the plane.
pub type Mat2 = nalgebra::Matrix2<f64>;
