//! Geodesic flows of surfaces `e^{2G}(dx^2 + dy^2)` in one isothermal chart:
//! curvature, the flow and its Jacobi fields, cone-field checks and
//! stable/unstable directions.
//!
//! Everything here is local. A closed negatively curved surface has no
//! global chart, so hyperbolicity is checked along finite-time trajectories
//! that stay inside the chart; trajectories that leave it are reported as
//! truncated rather than continued.

mod cones;
mod flow;
mod surface;

pub use cones::{
    estimate_stable_unstable, theta_invariant, verify_cones, ConeKind, ConeParams, ConeReport,
    DirectionReport, StableUnstable, DEFAULT_DIRECTIONS, DEFAULT_HORIZON, DIRECTION_TOL,
    GROWTH_SLACK,
};
pub use flow::{
    fundamental_matrix, geodesic_field, jacobi_flow, jacobi_to_tangent, flow, perp_field,
    trajectory, vertical_field, FlowState, JacobiVector, DEFAULT_STEP, SPEED_TOL,
};
pub use surface::{ChartDomain, IsothermalSurface, FD_LAPLACIAN_STEP, GRADIENT_CHECK_TOL};
