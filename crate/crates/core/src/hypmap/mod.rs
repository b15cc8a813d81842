//! Hyperbolic periodic orbits of planar maps: stable and unstable
//! directions, adapted metrics and charts, local and global manifolds, and
//! cone-field certificates.

mod cones;
mod global;
mod local;
mod orbit;

pub use cones::{
    cone_certify, continuity_probe, line_angle, perturbed_cat_map, stable_direction,
    unstable_direction, ConeCertificate, ConeSample, ContinuityPair, SignCone,
};
pub use global::{
    global_manifold, nesting_defect, CurvePoint, GlobalManifold, MAX_POLYLINE_POINTS,
    REFINE_SPACING,
};
pub use local::{adapted_maps, local_manifolds_periodic, AdaptedMaps, LocalManifolds, LocalOptions};
pub use orbit::{
    adapted_metric, stable_unstable_directions, AdaptedFrame, AdaptedMetric, OrbitData,
    OrbitDirections, CLOSURE_TOL, INVARIANCE_TOL, JACOBIAN_CHECK_TOL, MAX_METRIC_TERMS,
};
