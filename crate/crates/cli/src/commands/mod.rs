pub mod billiard;
pub mod dynchar;
pub mod geodesic;
pub mod manifold;
pub mod verify;

use hypman_core::graphtransform::{
    normalize_fixed_point, saddle_eigen, HyperbolicityParams, NormalizedMap, PlanarMap,
};

use crate::CliError;

/// Normalize the map at its fixed point with rates read off the Jacobian.
pub fn normalize(map: &PlanarMap, delta_target: f64, n_reg: usize) -> Result<NormalizedMap, CliError> {
    let j = map.jacobian(map.fixed_point())?;
    let ((mu, _), (lambda, _)) = saddle_eigen(j)?;
    let params = HyperbolicityParams::new(lambda.abs(), mu.abs(), n_reg)?;
    Ok(normalize_fixed_point(map, &params, delta_target)?)
}
