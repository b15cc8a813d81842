use crate::graphtransform::{
    estimate_delta, select_scale, sequence_fixed_point, HyperbolicityParams, ManifoldGraph,
    NormalizedMap, PlanarMap, Which, DEFAULT_DELTA_TARGET, DEFAULT_MAX_ITER, DEFAULT_REGULARITY,
    DEFAULT_TOL,
};
use crate::hypmap::orbit::{stable_unstable_directions, AdaptedFrame, OrbitData};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOptions {
    /// Defaults to `(1 + 2 rate) / 3` for the per-step rate of the orbit.
    pub lambda_t: Option<f64>,
    pub n_reg: usize,
    pub delta_target: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LocalOptions {
    fn default() -> Self {
        Self {
            lambda_t: None,
            n_reg: DEFAULT_REGULARITY,
            delta_target: DEFAULT_DELTA_TARGET,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Maps `psi_i = chart_{i+1}^{-1} o phi o chart_i` in the rescaled adapted
/// charts, with one scale `delta1` for the whole orbit.
#[derive(Debug, Clone)]
pub struct AdaptedMaps {
    pub frame: AdaptedFrame,
    pub maps: Vec<NormalizedMap>,
    pub delta1: f64,
}

pub fn adapted_maps(map: &PlanarMap, orbit: &OrbitData, opts: &LocalOptions) -> Result<AdaptedMaps> {
    let lambda_t = match opts.lambda_t {
        Some(l) => l,
        None => (1.0 + 2.0 * stable_unstable_directions(orbit)?.rate()) / 3.0,
    };
    let frame = AdaptedFrame::new(map, orbit, lambda_t)?;
    // the sequence is hyperbolic with rates lambda_t and 1 / lambda_t
    let params = HyperbolicityParams::new(lambda_t, 1.0 / lambda_t, opts.n_reg)?;
    let build = |delta1: f64| -> Result<Vec<NormalizedMap>> {
        (0..frame.period())
            .map(|i| {
                NormalizedMap::from_charts(
                    map.clone(),
                    frame.chart(i, delta1)?,
                    frame.chart(i + 1, delta1)?,
                    params,
                )
            })
            .collect()
    };
    if !(opts.delta_target > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta target must be > 0, got {}",
            opts.delta_target
        )));
    }
    let (delta1, delta) = select_scale(opts.delta_target, |delta1| {
        build(delta1)?
            .iter()
            .try_fold(0.0f64, |m, nm| Ok(m.max(estimate_delta(nm, opts.n_reg)?)))
    })?;
    let mut params = params;
    params.delta = delta;
    let maps = build(delta1)?.into_iter().map(|nm| nm.with_params(params)).collect();
    Ok(AdaptedMaps {
        frame,
        maps,
        delta1,
    })
}

/// Local unstable and stable manifolds at every point of a periodic orbit.
/// Graph `i` lives in the rescaled adapted chart of point `i`.
#[derive(Debug, Clone)]
pub struct LocalManifolds {
    pub adapted: AdaptedMaps,
    pub unstable: Vec<ManifoldGraph>,
    pub stable: Vec<ManifoldGraph>,
}

impl LocalManifolds {
    pub fn graph(&self, which: Which, i: usize) -> &ManifoldGraph {
        let p = self.unstable.len();
        match which {
            Which::Unstable => &self.unstable[i % p],
            Which::Stable => &self.stable[i % p],
        }
    }
}

pub fn local_manifolds_periodic(
    map: &PlanarMap,
    orbit: &OrbitData,
    opts: &LocalOptions,
) -> Result<LocalManifolds> {
    let adapted = adapted_maps(map, orbit, opts)?;
    let unstable = sequence_fixed_point(&adapted.maps, Which::Unstable, opts.tol, opts.max_iter)?;
    let stable = sequence_fixed_point(&adapted.maps, Which::Stable, opts.tol, opts.max_iter)?;
    Ok(LocalManifolds {
        adapted,
        unstable,
        stable,
    })
}
