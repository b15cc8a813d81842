use std::path::Path;

use hypman_core::billiard::{BilliardTable, Disk, PhasePoint};
use hypman_core::geoflow::{FlowState, IsothermalSurface, DEFAULT_DIRECTIONS, DEFAULT_HORIZON, DEFAULT_STEP};
use hypman_core::graphtransform::{figure2_map, PlanarMap, DEFAULT_DELTA_TARGET, DEFAULT_MAX_ITER, DEFAULT_REGULARITY, DEFAULT_TOL};
use hypman_core::hypmap::perturbed_cat_map;
use hypman_core::numcore::DEFAULT_NODES;
use hypman_core::{Mat2, Vec2};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One JSON document per run; sections absent from the file take their
/// defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold: Option<ManifoldConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynchar: Option<DyncharConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub billiard: Option<BilliardConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim().is_empty() {
            return Err(CliError::Usage("config file is empty".into()));
        }
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad config: {e}")))?;
        if cfg.manifold.is_none() && cfg.dynchar.is_none() && cfg.billiard.is_none() && cfg.geodesic.is_none() {
            return Err(CliError::Usage("config has no sections".into()));
        }
        Ok(cfg)
    }

    /// The config as a single JSON line, for output headers.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(msg()))
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    check(v > 0.0 && v.is_finite(), || format!("{name} must be finite and > 0, got {v}"))
}

fn at_least(name: &str, v: usize, min: usize) -> Result<(), CliError> {
    check(v >= min, || format!("{name} must be >= {min}, got {v}"))
}

/// A polynomial term `coef * x1^p1 * x2^p2`.
pub type Term = (f64, u32, u32);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Figure2,
    Linear { matrix: [[f64; 2]; 2] },
    Polynomial {
        x1: Vec<Term>,
        x2: Vec<Term>,
        #[serde(default)]
        fixed_point: [f64; 2],
    },
    PerturbedCat { eps: f64 },
}

impl Default for MapSpec {
    fn default() -> Self {
        MapSpec::Figure2
    }
}

fn eval_poly(terms: &[Term], x: Vec2) -> f64 {
    terms.iter().map(|&(c, p, q)| c * x[0].powi(p as i32) * x[1].powi(q as i32)).sum()
}

fn poly_partial(terms: &[Term], x: Vec2, k: usize) -> f64 {
    terms
        .iter()
        .map(|&(c, p, q)| {
            let (p, q) = (p as i32, q as i32);
            match k {
                0 if p > 0 => c * p as f64 * x[0].powi(p - 1) * x[1].powi(q),
                1 if q > 0 => c * q as f64 * x[0].powi(p) * x[1].powi(q - 1),
                _ => 0.0,
            }
        })
        .sum()
}

impl MapSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            MapSpec::Figure2 => Ok(()),
            MapSpec::Linear { matrix } => check(
                matrix.iter().flatten().all(|v| v.is_finite()),
                || "linear map entries must be finite".into(),
            ),
            MapSpec::Polynomial { x1, x2, fixed_point } => check(
                !x1.is_empty()
                    && !x2.is_empty()
                    && x1.iter().chain(x2).all(|t| t.0.is_finite())
                    && fixed_point.iter().all(|v| v.is_finite()),
                || "polynomial map needs finite terms for both components".into(),
            ),
            MapSpec::PerturbedCat { eps } => check(eps.is_finite(), || "eps must be finite".into()),
        }
    }

    pub fn build(&self) -> Result<PlanarMap, CliError> {
        Ok(match self {
            MapSpec::Figure2 => figure2_map(),
            MapSpec::Linear { matrix } => {
                PlanarMap::linear(Mat2::new(matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1]))?
            }
            MapSpec::Polynomial { x1, x2, fixed_point } => {
                let (a, b) = (x1.clone(), x2.clone());
                let (ja, jb) = (x1.clone(), x2.clone());
                PlanarMap::new(move |x| Vec2::new(eval_poly(&a, x), eval_poly(&b, x)))
                    .with_jacobian(move |x| {
                        Mat2::new(
                            poly_partial(&ja, x, 0),
                            poly_partial(&ja, x, 1),
                            poly_partial(&jb, x, 0),
                            poly_partial(&jb, x, 1),
                        )
                    })
                    .with_fixed_point(Vec2::new(fixed_point[0], fixed_point[1]))
            }
            MapSpec::PerturbedCat { eps } => perturbed_cat_map(*eps),
        })
    }
}

/// Base point and period of a periodic orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSpec {
    pub point: [f64; 2],
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldConfig {
    pub map: MapSpec,
    pub delta_target: f64,
    pub nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub n_reg: usize,
    /// Points per polyline of the local manifolds.
    pub samples: usize,
    /// Pushes of the local manifolds; 0 writes the local manifolds only.
    pub global_iterations: usize,
    pub orbit: Option<OrbitSpec>,
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        Self {
            map: MapSpec::Figure2,
            delta_target: DEFAULT_DELTA_TARGET,
            nodes: DEFAULT_NODES,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            n_reg: DEFAULT_REGULARITY,
            samples: 201,
            global_iterations: 0,
            orbit: None,
        }
    }
}

impl ManifoldConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.map.validate()?;
        positive("delta_target", self.delta_target)?;
        positive("tol", self.tol)?;
        at_least("nodes", self.nodes, 3)?;
        at_least("max_iter", self.max_iter, 1)?;
        at_least("n_reg", self.n_reg, 1)?;
        at_least("samples", self.samples, 2)?;
        if let Some(o) = &self.orbit {
            at_least("orbit.period", o.period, 1)?;
            check(o.point.iter().all(|v| v.is_finite()), || "orbit point must be finite".into())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DyncharConfig {
    pub map: MapSpec,
    pub delta_target: f64,
    pub n_max: usize,
    pub resolution: usize,
    pub sigma: f64,
}

impl Default for DyncharConfig {
    fn default() -> Self {
        Self {
            map: MapSpec::Figure2,
            delta_target: DEFAULT_DELTA_TARGET,
            n_max: 8,
            resolution: 256,
            sigma: 1.0,
        }
    }
}

impl DyncharConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.map.validate()?;
        positive("delta_target", self.delta_target)?;
        at_least("resolution", self.resolution, 1)?;
        check(self.sigma > 0.0 && self.sigma <= 1.0, || format!("sigma must lie in (0, 1], got {}", self.sigma))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TableSpec {
    ThreeDisks { radius: f64, side: f64 },
    Disks { disks: Vec<DiskSpec> },
    UnitDisk,
    InteriorDisk { center: [f64; 2], radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Default for TableSpec {
    fn default() -> Self {
        TableSpec::ThreeDisks { radius: 1.0, side: 6.0 }
    }
}

impl TableSpec {
    pub fn build(&self) -> Result<BilliardTable, CliError> {
        let table = match self {
            TableSpec::ThreeDisks { radius, side } => BilliardTable::three_disks(*radius, *side),
            TableSpec::Disks { disks } => BilliardTable::exterior_disks(
                disks.iter().map(|d| Disk::new(Vec2::new(d.center[0], d.center[1]), d.radius)).collect(),
            ),
            TableSpec::UnitDisk => Ok(BilliardTable::unit_disk()),
            TableSpec::InteriorDisk { center, radius } => {
                BilliardTable::interior_disk(Vec2::new(center[0], center[1]), *radius)
            }
        };
        table.map_err(|e| CliError::Usage(format!("bad table: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BilliardMode {
    Map,
    Trapped,
    Period2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub component: usize,
    pub theta: f64,
    pub sigma: f64,
}

impl From<PhaseSpec> for PhasePoint {
    fn from(p: PhaseSpec) -> Self {
        PhasePoint::new(p.component, p.theta, p.sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilliardConfig {
    pub mode: BilliardMode,
    pub table: TableSpec,
    pub start: PhaseSpec,
    pub bounces: usize,
    pub component: usize,
    pub resolution: usize,
    pub n_max: usize,
    pub pair: [usize; 2],
}

impl Default for BilliardConfig {
    fn default() -> Self {
        Self {
            mode: BilliardMode::Trapped,
            table: TableSpec::default(),
            start: PhaseSpec { component: 0, theta: 0.0, sigma: 0.0 },
            bounces: 20,
            component: 0,
            resolution: hypman_core::billiard::DEFAULT_RESOLUTION,
            n_max: hypman_core::billiard::DEFAULT_BOUNCES,
            pair: [0, 1],
        }
    }
}

impl BilliardConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let table = self.table.build()?;
        let n = table.disks().len();
        check(self.start.component < n && self.component < n, || format!("component out of range for {n} disks"))?;
        check(self.start.theta.is_finite() && self.start.sigma.abs() < 1.0, || {
            "start needs finite theta and |sigma| < 1".into()
        })?;
        at_least("resolution", self.resolution, 1)?;
        if self.mode == BilliardMode::Period2 {
            check(
                self.pair[0] != self.pair[1] && self.pair.iter().all(|&c| c < n),
                || format!("pair must name two different components of {n}"),
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Flat,
    Constant { c: f64 },
    Poincare,
    Quadratic { c: f64 },
    GaussianBump { amplitude: f64, width: f64 },
    PerturbedPoincare { eps: f64 },
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        SurfaceSpec::Poincare
    }
}

impl SurfaceSpec {
    pub fn build(&self) -> Result<IsothermalSurface, CliError> {
        let s = match *self {
            SurfaceSpec::Flat => Ok(IsothermalSurface::flat()),
            SurfaceSpec::Constant { c } if c.is_finite() => Ok(IsothermalSurface::constant(c)),
            SurfaceSpec::Constant { c } => return Err(CliError::Usage(format!("constant must be finite, got {c}"))),
            SurfaceSpec::Poincare => Ok(IsothermalSurface::poincare()),
            SurfaceSpec::Quadratic { c } if c.is_finite() => Ok(IsothermalSurface::quadratic(c)),
            SurfaceSpec::Quadratic { c } => return Err(CliError::Usage(format!("coefficient must be finite, got {c}"))),
            SurfaceSpec::GaussianBump { amplitude, width } => IsothermalSurface::gaussian_bump(amplitude, width),
            SurfaceSpec::PerturbedPoincare { eps } => IsothermalSurface::perturbed_poincare(eps),
        };
        s.map_err(|e| CliError::Usage(format!("bad surface: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GeodesicMode {
    Flow,
    Cones,
    Directions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeodesicConfig {
    pub mode: GeodesicMode,
    pub surface: SurfaceSpec,
    /// `(x, y, theta)`.
    pub start: [f64; 3],
    pub t: f64,
    pub step: f64,
    /// Curvature bounds `K0 <= -K <= K1`; sampled from the surface when absent.
    pub k0: Option<f64>,
    pub k1: Option<f64>,
    pub t_max: f64,
    pub n_dirs: usize,
    pub horizon: f64,
}

impl Default for GeodesicConfig {
    fn default() -> Self {
        Self {
            mode: GeodesicMode::Cones,
            surface: SurfaceSpec::Poincare,
            start: [0.1, 0.2, 1.0],
            t: 3.0,
            step: DEFAULT_STEP,
            k0: None,
            k1: None,
            t_max: 3.0,
            n_dirs: DEFAULT_DIRECTIONS,
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl GeodesicConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let s = self.surface.build()?;
        check(s.contains(self.start[0], self.start[1]) && self.start[2].is_finite(), || {
            format!("start {:?} is outside the chart of {}", self.start, s.name)
        })?;
        check(self.t.is_finite(), || "t must be finite".into())?;
        positive("step", self.step)?;
        positive("t_max", self.t_max)?;
        positive("horizon", self.horizon)?;
        at_least("n_dirs", self.n_dirs, 1)?;
        check(self.k0.is_some() == self.k1.is_some(), || "give both k0 and k1 or neither".into())
    }

    pub fn start_state(&self) -> FlowState {
        FlowState::new(self.start[0], self.start[1], self.start[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_configs_are_usage_errors() {
        assert!(matches!(RunConfig::parse(""), Err(CliError::Usage(_))));
        assert!(matches!(RunConfig::parse("  \n"), Err(CliError::Usage(_))));
        assert!(matches!(RunConfig::parse("{}"), Err(CliError::Usage(_))));
        assert!(matches!(RunConfig::parse("{\"nope\": 1}"), Err(CliError::Usage(_))));
    }

    #[test]
    fn sections_take_defaults() {
        let c = RunConfig::parse("{\"manifold\": {\"delta_target\": 0.02}}").unwrap();
        let m = c.manifold.unwrap();
        assert_eq!(m.delta_target, 0.02);
        assert_eq!(m.map, MapSpec::Figure2);
        assert_eq!(m.max_iter, DEFAULT_MAX_ITER);
    }

    #[test]
    fn polynomial_map_matches_figure2() {
        let spec = MapSpec::Polynomial {
            x1: vec![(2.0, 1, 0), (0.5, 0, 2)],
            x2: vec![(0.5, 0, 1), (0.5, 2, 0)],
            fixed_point: [0.0, 0.0],
        };
        let (m, f) = (spec.build().unwrap(), figure2_map());
        let x = Vec2::new(0.3, -0.2);
        assert_eq!(m.forward(x).unwrap(), f.forward(x).unwrap());
        assert!((m.jacobian(x).unwrap() - f.jacobian(x).unwrap()).abs().max() < 1e-15);
    }

    #[test]
    fn tagged_specs_parse() {
        let c = RunConfig::parse(
            r#"{"billiard": {"mode": "period2", "table": {"kind": "disks", "disks": [{"center": [0, 0], "radius": 1}, {"center": [4, 0], "radius": 1}]}},
               "geodesic": {"surface": {"kind": "gaussian_bump", "amplitude": 0.5, "width": 0.7}}}"#,
        )
        .unwrap();
        c.billiard.unwrap().validate().unwrap();
        c.geodesic.unwrap().validate().unwrap();
    }
}
