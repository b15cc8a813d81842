use std::sync::Arc;

use crate::graphtransform::transform::{admissibility, graph_transform, invariance_residual};
use crate::graphtransform::{AffineChart, NormalizedMap, Which};
use crate::numcore::{ChebGrid, GridFunction, DEFAULT_NODES};
use crate::{Error, Result, Vec2};

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_ITER: usize = 60;

/// One step of the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `C^1` grid distance between successive iterates.
    pub distance_c1: f64,
    /// `C^N` seminorm distance between successive iterates.
    pub distance_cn: f64,
}

/// A converged local stable or unstable manifold as a graph in normalized
/// chart coordinates.
#[derive(Debug, Clone)]
pub struct ManifoldGraph {
    pub which: Which,
    pub graph: GridFunction,
    pub chart: AffineChart,
    pub residual: f64,
    pub iterations: usize,
    pub log: Vec<IterationRecord>,
}

impl ManifoldGraph {
    pub fn eval(&self, s: f64) -> Result<f64> {
        self.graph.eval(s)
    }

    /// The graph point over parameter `s` in normalized coordinates.
    pub fn normalized_point(&self, s: f64) -> Result<Vec2> {
        let v = self.graph.eval(s)?;
        Ok(match self.which {
            Which::Unstable => Vec2::new(s, v),
            Which::Stable => Vec2::new(v, s),
        })
    }

    pub fn point(&self, s: f64) -> Result<Vec2> {
        Ok(self.chart.from_normalized(self.normalized_point(s)?))
    }

    /// `samples` points of the graph, uniform in the parameter, in the
    /// original coordinates.
    pub fn polyline(&self, samples: usize) -> Result<Vec<Vec2>> {
        let samples = samples.max(2);
        (0..samples)
            .map(|i| self.point(-1.0 + 2.0 * i as f64 / (samples - 1) as f64))
            .collect()
    }

    /// `F''(0) / 2` measured in the chart before the rescale by `delta1`.
    pub fn taylor_coefficient(&self) -> Result<f64> {
        let d2 = self.graph.derivative(2)?;
        Ok(d2.at_zero() / (2.0 * self.chart.scale()))
    }

    pub fn slope_at_zero(&self) -> Result<f64> {
        Ok(self.graph.derivative(1)?.at_zero())
    }

    /// Unit tangent at the base point in the original coordinates.
    pub fn tangent(&self) -> Result<Vec2> {
        let s = self.slope_at_zero()?;
        let local = match self.which {
            Which::Unstable => Vec2::new(1.0, s),
            Which::Stable => Vec2::new(s, 1.0),
        };
        let t = self.chart.basis() * local;
        Ok(t / t.norm())
    }

    /// `|xi2 - F_u(xi1)|` or `|xi1 - F_s(xi2)|` for a normalized point.
    pub fn distance_normalized(&self, xi: Vec2) -> Result<f64> {
        if xi.amax() > 1.0 + 1e-12 {
            return Err(Error::OutOfDomain(format!(
                "({}, {}) outside the unit chart ball",
                xi[0], xi[1]
            )));
        }
        let (s, v) = match self.which {
            Which::Unstable => (xi[0], xi[1]),
            Which::Stable => (xi[1], xi[0]),
        };
        Ok((v - self.graph.eval(s.clamp(-1.0, 1.0))?).abs())
    }

    /// Distance of a point given in original coordinates, in normalized units.
    pub fn distance_to_manifold(&self, w: Vec2) -> Result<f64> {
        self.distance_normalized(self.chart.to_normalized(w))
    }
}

/// Iterate the graph transform from `F0 = 0` until successive iterates are
/// `tol`-close in the `C^1` grid norm.
pub fn compute_manifold(
    nm: &NormalizedMap,
    which: Which,
    tol: f64,
    max_iter: usize,
) -> Result<ManifoldGraph> {
    compute_manifold_on(ChebGrid::new(DEFAULT_NODES)?, nm, which, tol, max_iter)
}

pub fn compute_manifold_on(
    grid: Arc<ChebGrid>,
    nm: &NormalizedMap,
    which: Which,
    tol: f64,
    max_iter: usize,
) -> Result<ManifoldGraph> {
    let mut out = sequence_fixed_point_on(grid, std::slice::from_ref(nm), which, tol, max_iter)?;
    Ok(out.remove(0))
}

/// Graphs `F_m` for a periodic sequence of normalized maps, solving
/// `Phi^u_m F_m = F_{m+1}` (unstable) or `Phi^s_m F_{m+1} = F_m` (stable)
/// with indices mod `p`. Graph `m` lives in the source chart of `maps[m]`.
pub fn sequence_fixed_point(
    maps: &[NormalizedMap],
    which: Which,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<ManifoldGraph>> {
    sequence_fixed_point_on(ChebGrid::new(DEFAULT_NODES)?, maps, which, tol, max_iter)
}

pub fn sequence_fixed_point_on(
    grid: Arc<ChebGrid>,
    maps: &[NormalizedMap],
    which: Which,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<ManifoldGraph>> {
    let p = maps.len();
    if p == 0 {
        return Err(Error::InvalidArgument("empty map sequence".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    let n_reg = maps[0].params().n_reg.min(grid.len() - 1);
    let mut graphs = vec![GridFunction::zeros(grid.clone()); p];
    let mut log = Vec::new();
    let mut distance = f64::INFINITY;

    for iteration in 1..=max_iter {
        let next = (0..p)
            .map(|m| match which {
                Which::Unstable => {
                    let prev = (m + p - 1) % p;
                    graph_transform(&maps[prev], which, &graphs[prev])
                }
                Which::Stable => graph_transform(&maps[m], which, &graphs[(m + 1) % p]),
            })
            .collect::<Result<Vec<_>>>()?;

        let mut d1: f64 = 0.0;
        let mut dn: f64 = 0.0;
        for (new, old) in next.iter().zip(&graphs) {
            let diff = new.sub(old)?;
            d1 = d1.max(diff.c1_norm());
            dn = dn.max(diff.ck_seminorm(n_reg)?);
        }
        for g in &next {
            let (ck, lip) = admissibility(g, n_reg)?;
            if ck > 1.0 || lip > 1.0 {
                log::warn!("iterate {iteration} leaves the admissible class: C^N {ck:.3e}, Lip {lip:.3e}");
            }
        }
        graphs = next;
        distance = d1;
        log.push(IterationRecord {
            iteration,
            distance_c1: d1,
            distance_cn: dn,
        });
        if d1 <= tol {
            return finish(maps, which, graphs, iteration, log);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        distance,
    })
}

fn finish(
    maps: &[NormalizedMap],
    which: Which,
    graphs: Vec<GridFunction>,
    iterations: usize,
    log: Vec<IterationRecord>,
) -> Result<Vec<ManifoldGraph>> {
    let p = maps.len();
    (0..p)
        .map(|m| {
            let residual = match which {
                Which::Unstable => {
                    invariance_residual(&maps[m], which, &graphs[m], &graphs[(m + 1) % p])?
                }
                Which::Stable => {
                    invariance_residual(&maps[m], which, &graphs[(m + 1) % p], &graphs[m])?
                }
            };
            Ok(ManifoldGraph {
                which,
                graph: graphs[m].clone(),
                chart: maps[m].source().clone(),
                residual,
                iterations,
                log: log.clone(),
            })
        })
        .collect()
}
