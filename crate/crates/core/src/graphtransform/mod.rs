//! Graph transform for planar hyperbolic maps: normalization near a fixed
//! point, the transforms `Phi_u` / `Phi_s`, their fixed points (local
//! unstable and stable manifolds), periodic sequences of maps and the
//! quantitative dynamical characterization of the manifolds.

mod dynamics;
mod manifold;
mod map;
mod normalize;
mod transform;

pub use dynamics::{convexity_bound, membership_test, MembershipBound};
pub use manifold::{
    compute_manifold, compute_manifold_on, sequence_fixed_point, sequence_fixed_point_on,
    IterationRecord, ManifoldGraph, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use map::{figure2_map, AffineChart, DisplacementFn, JacobianFn, MapFn, PlanarMap};
pub use normalize::{
    default_tildes, estimate_delta, normalize_fixed_point, normalize_fixed_point_with_scale,
    saddle_eigen, HyperbolicityParams, NormalizedMap, DEFAULT_DELTA_TARGET, DEFAULT_REGULARITY,
    NEUTRAL_RATE_TOL,
};
pub(crate) use normalize::select_scale;
pub use transform::{
    admissibility, contraction_ratio, graph_transform, graph_transform_s, graph_transform_u,
    invariance_residual,
};

/// Which of the two invariant manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Which {
    Unstable,
    Stable,
}
