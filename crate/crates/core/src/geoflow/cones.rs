use rayon::prelude::*;

use crate::geoflow::flow::{co_integrate, flow, FlowState, JacobiVector};
use crate::geoflow::surface::IsothermalSurface;
use crate::{Error, Result};

pub const DEFAULT_DIRECTIONS: usize = 16;
pub const DEFAULT_HORIZON: f64 = 8.0;
/// Angle tolerance for the horizon-doubling test.
pub const DIRECTION_TOL: f64 = 1e-6;
/// Relative slack in `R(t) >= e^{2 nu t} R(0)`.
pub const GROWTH_SLACK: f64 = 1e-6;
const THETA_SLACK: f64 = 1e-12;
/// Relative slack when comparing the curvature with its bounds.
const BOUND_SLACK: f64 = 1e-9;

/// Curvature bounds `K0 <= -K <= K1` and the cone constants they give.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    pub k0: f64,
    pub k1: f64,
    pub zeta: f64,
    pub gamma: f64,
    pub nu: f64,
}

impl ConeParams {
    pub fn new(k0: f64, k1: f64) -> Result<Self> {
        if !(k0 > 0.0 && k0 <= k1 && k1.is_finite()) {
            return Err(Error::InvalidBounds(format!("need 0 < K0 <= K1, got K0 = {k0}, K1 = {k1}")));
        }
        let zeta = 1.0 / k1;
        let gamma = k0.sqrt() / 3.0;
        Ok(Self {
            k0,
            k1,
            zeta,
            gamma,
            nu: gamma * (1.0 + zeta * k0),
        })
    }

    /// `R = zeta a^2 + b^2`.
    pub fn r(&self, v: JacobiVector) -> f64 {
        self.zeta * v.a * v.a + v.b * v.b
    }

    fn check_curvature(&self, k: f64, t: f64) -> Result<()> {
        let slack = BOUND_SLACK * self.k1;
        if -k < self.k0 - slack || -k > self.k1 + slack {
            return Err(Error::InvalidBounds(format!(
                "curvature {k} at t = {t} outside [-{}, -{}]",
                self.k1, self.k0
            )));
        }
        Ok(())
    }
}

/// `Theta = a b / (zeta a^2 + b^2)`, invariant under scaling.
pub fn theta_invariant(v: JacobiVector, p: &ConeParams) -> Result<f64> {
    if v.is_zero() || !v.a.is_finite() || !v.b.is_finite() {
        return Err(Error::Undefined(format!("Theta of ({}, {})", v.a, v.b)));
    }
    Ok(v.a * v.b / p.r(v))
}

/// Time derivative of Theta along a Jacobi field at curvature `k`.
fn theta_rate(v: JacobiVector, k: f64, p: &ConeParams) -> f64 {
    let r = p.r(v);
    let th = v.a * v.b / r;
    -(v.a * v.a - k * v.b * v.b) / r + 2.0 * (1.0 - p.zeta * k) * th * th
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    /// `Theta <= -gamma`, checked forward in time.
    Unstable,
    /// `Theta >= gamma`, checked backward in time.
    Stable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionReport {
    pub kind: ConeKind,
    pub initial: JacobiVector,
    pub theta0: f64,
    /// `dTheta/dt` at time 0.
    pub theta_rate0: f64,
    /// Largest `Theta` (unstable) or smallest (stable) over the samples.
    pub theta_extreme: f64,
    /// Smallest `R(t) / (e^{2 nu |t|} R(0))` over the samples.
    pub min_growth: f64,
    pub final_growth: f64,
    pub samples: usize,
    pub theta_ok: bool,
    pub growth_ok: bool,
}

impl DirectionReport {
    pub fn passed(&self) -> bool {
        self.theta_ok && self.growth_ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    pub params: ConeParams,
    pub t_max: f64,
    pub directions: Vec<DirectionReport>,
}

impl ConeReport {
    pub fn passed(&self) -> bool {
        self.directions.iter().all(DirectionReport::passed)
    }
}

/// `n` vectors with `R = 1` in the unstable cone: `|Theta|` log-spaced
/// from `gamma` to its largest value, both solutions `b` of each level.
fn unstable_samples(p: &ConeParams, n: usize) -> Vec<JacobiVector> {
    let levels = n.div_ceil(2);
    let top = 0.5 / p.zeta.sqrt();
    let mut out = Vec::with_capacity(2 * levels);
    for i in 0..levels {
        let frac = if levels == 1 { 0.0 } else { i as f64 / (levels - 1) as f64 };
        let mut m = p.gamma * (top / p.gamma).powf(frac);
        if i == 0 {
            m = p.gamma;
        }
        let th = -m;
        // theta b^2 - b + theta zeta = 0 with a = 1
        let disc = (1.0 - 4.0 * th * th * p.zeta).max(0.0).sqrt();
        let b_small = 2.0 * th * p.zeta / (1.0 + disc);
        for b in [b_small, p.zeta / b_small] {
            let v = JacobiVector::new(1.0, b);
            out.push(v.scaled(1.0 / p.r(v).sqrt()));
        }
    }
    out.truncate(n);
    out
}

fn check_direction(
    s: &IsothermalSurface,
    st: FlowState,
    p: &ConeParams,
    kind: ConeKind,
    v: JacobiVector,
    t_max: f64,
    step: f64,
) -> Result<DirectionReport> {
    let theta0 = theta_invariant(v, p)?;
    let k0 = s.curvature(st.x, st.y)?;
    p.check_curvature(k0, 0.0)?;
    let rate = theta_rate(v, k0, p);
    let r0 = p.r(v);
    let (sign, t_end) = match kind {
        ConeKind::Unstable => (1.0, t_max),
        ConeKind::Stable => (-1.0, -t_max),
    };
    let mut rep = DirectionReport {
        kind,
        initial: v,
        theta0,
        theta_rate0: rate,
        theta_extreme: theta0,
        min_growth: 1.0,
        final_growth: 1.0,
        samples: 0,
        theta_ok: true,
        growth_ok: true,
    };
    co_integrate(s, st, &[v], t_end, step, |t, y| {
        p.check_curvature(s.curvature_unchecked(y[0], y[1]), t)?;
        let w = JacobiVector::new(y[3], y[4]);
        let th = theta_invariant(w, p)?;
        let growth = p.r(w) / ((2.0 * p.nu * t.abs()).exp() * r0);
        rep.samples += 1;
        rep.min_growth = rep.min_growth.min(growth);
        rep.final_growth = growth;
        // the unstable cone is Theta <= -gamma, the stable one Theta >= gamma
        if sign * th > sign * rep.theta_extreme {
            rep.theta_extreme = th;
        }
        Ok(())
    })?;
    rep.theta_ok = match kind {
        ConeKind::Unstable => rep.theta_extreme <= -p.gamma + THETA_SLACK,
        ConeKind::Stable => rep.theta_extreme >= p.gamma - THETA_SLACK,
    };
    rep.growth_ok = rep.min_growth >= 1.0 - GROWTH_SLACK;
    Ok(rep)
}

/// Checks invariance and expansion of the cones `Theta <= -gamma` forward
/// and `Theta >= gamma` backward along the geodesic through `st`, for
/// `n_dirs` initial vectors in each cone. The curvature bounds are checked
/// at every step; a violation is `InvalidBounds`.
pub fn verify_cones(
    s: &IsothermalSurface,
    st: FlowState,
    p: &ConeParams,
    t_max: f64,
    n_dirs: usize,
    step: f64,
) -> Result<ConeReport> {
    if !(t_max > 0.0) || !t_max.is_finite() || n_dirs == 0 {
        return Err(Error::InvalidArgument(format!(
            "need t_max > 0 and n_dirs > 0, got {t_max}, {n_dirs}"
        )));
    }
    let unstable = unstable_samples(p, n_dirs);
    let jobs: Vec<(ConeKind, JacobiVector)> = unstable
        .iter()
        .map(|&v| (ConeKind::Unstable, v))
        // (a, b) -> (a, -b) swaps the cones
        .chain(unstable.iter().map(|v| (ConeKind::Stable, JacobiVector::new(v.a, -v.b))))
        .collect();
    let directions = jobs
        .par_iter()
        .map(|&(kind, v)| check_direction(s, st, p, kind, v, t_max, step))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConeReport {
        params: *p,
        t_max,
        directions,
    })
}

/// Unit `(a, b)` directions of `E_u` and `E_s` at a point, with the angle
/// each moved when the horizon was halved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableUnstable {
    pub e_u: JacobiVector,
    pub e_s: JacobiVector,
    pub horizon: f64,
    pub drift_u: f64,
    pub drift_s: f64,
}

impl StableUnstable {
    pub fn converged(&self) -> bool {
        self.drift_u <= DIRECTION_TOL && self.drift_s <= DIRECTION_TOL
    }

    /// `|det [e_u e_s]|`.
    pub fn transversality(&self) -> f64 {
        (self.e_u.a * self.e_s.b - self.e_u.b * self.e_s.a).abs()
    }
}

fn unit(v: JacobiVector) -> JacobiVector {
    let s = if v.a < 0.0 || (v.a == 0.0 && v.b < 0.0) { -1.0 } else { 1.0 };
    v.scaled(s / v.norm())
}

fn line_angle(u: JacobiVector, v: JacobiVector) -> f64 {
    let cross = (u.a * v.b - u.b * v.a).abs();
    let dot = (u.a * v.a + u.b * v.b).abs();
    cross.atan2(dot)
}

/// The cone centre pushed from `phi^{-t}(st)` to `st` (unstable) or from
/// `phi^{t}(st)` back to `st` (stable).
fn pushed(s: &IsothermalSurface, st: FlowState, p: &ConeParams, t: f64, step: f64) -> Result<JacobiVector> {
    let start = flow(s, st, -t, step)?;
    let centre = JacobiVector::new(1.0, -t.signum() * p.zeta.sqrt());
    let y = co_integrate(s, start, &[centre], t, step, |_, _| Ok(()))?;
    let v = JacobiVector::new(y[3], y[4]);
    if !(v.norm() > 0.0) || !v.norm().is_finite() {
        return Err(Error::Undefined("pushed cone direction degenerated".into()));
    }
    Ok(unit(v))
}

/// `E_u` and `E_s` at `st` by pushing the cone centres over `horizon`,
/// compared with the result for `horizon / 2`.
pub fn estimate_stable_unstable(
    s: &IsothermalSurface,
    st: FlowState,
    p: &ConeParams,
    horizon: f64,
    step: f64,
) -> Result<StableUnstable> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    let e_u = pushed(s, st, p, horizon, step)?;
    let e_s = pushed(s, st, p, -horizon, step)?;
    let half_u = pushed(s, st, p, 0.5 * horizon, step)?;
    let half_s = pushed(s, st, p, -0.5 * horizon, step)?;
    Ok(StableUnstable {
        e_u,
        e_s,
        horizon,
        drift_u: line_angle(e_u, half_u),
        drift_s: line_angle(e_s, half_s),
    })
}
