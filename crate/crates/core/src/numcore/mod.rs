//! Numerical kernels shared by the rest of the crate: spectral grid
//! functions on `[-1, 1]`, monotone inversion, fixed-step RK4 and
//! finite-difference Jacobians.

mod jacobian;
mod ode;
mod roots;
mod spectral;

pub use jacobian::fd_jacobian;
pub use ode::{integrate, integrate_observed, FnField, IntegrationEnd, OdeField};
pub use roots::{invert_monotone, NEWTON_MAX_ITER, NEWTON_TOL};
pub use spectral::{cheb_nodes, ChebGrid, GridFunction, DEFAULT_NODES, EXTRAPOLATION_MARGIN};
