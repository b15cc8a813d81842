use crate::graphtransform::{saddle_eigen, AffineChart, PlanarMap};
use crate::{Error, Mat2, Result, Vec2};

pub const CLOSURE_TOL: f64 = 1e-9;
pub const JACOBIAN_CHECK_TOL: f64 = 1e-6;
pub const INVARIANCE_TOL: f64 = 1e-7;
pub const MAX_METRIC_TERMS: usize = 10_000;

/// A periodic orbit `x_0, ..., x_{p-1}` of a planar map with the
/// differential at each point.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitData {
    pub points: Vec<Vec2>,
    pub jacobians: Vec<Mat2>,
}

impl OrbitData {
    /// Follow `map` for `period` steps from `start`, checking that the orbit
    /// closes and that each differential agrees with finite differences.
    pub fn from_map(map: &PlanarMap, start: Vec2, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidArgument("period must be >= 1".into()));
        }
        let mut points = Vec::with_capacity(period);
        let mut jacobians = Vec::with_capacity(period);
        let mut x = start;
        for _ in 0..period {
            let j = map.jacobian(x)?;
            let fd = map.fd_jacobian(x, 1e-6)?;
            let err = (j - fd).amax();
            if err > JACOBIAN_CHECK_TOL * j.amax().max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "differential at ({}, {}) differs from finite differences by {err:e}",
                    x[0], x[1]
                )));
            }
            points.push(x);
            jacobians.push(j);
            x = map.forward(x)?;
        }
        let defect = map.displacement(x, start).norm();
        if defect > CLOSURE_TOL {
            return Err(Error::InvalidArgument(format!(
                "orbit does not close after {period} steps (defect {defect:e})"
            )));
        }
        Ok(Self { points, jacobians })
    }

    pub fn period(&self) -> usize {
        self.points.len()
    }

    /// `d phi^p` at point `i`.
    pub fn monodromy(&self, i: usize) -> Mat2 {
        let p = self.period();
        (0..p).fold(Mat2::identity(), |acc, k| self.jacobians[(i + k) % p] * acc)
    }
}

/// Stable and unstable directions along a hyperbolic periodic orbit, with
/// the one-step factors `J_i e_u(i) = a_i e_u(i+1)`, `J_i e_s(i) = b_i e_s(i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDirections {
    pub e_u: Vec<Vec2>,
    pub e_s: Vec<Vec2>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Monodromy eigenvalues, expanding and contracting.
    pub mu: f64,
    pub lambda: f64,
    /// Largest relative deviation of `J_i e(i)` from the line of `e(i+1)`.
    pub defect: f64,
}

impl OrbitDirections {
    /// Per-step contraction rate `max(|lambda|, 1/|mu|)^(1/p)`.
    pub fn rate(&self) -> f64 {
        let p = self.e_u.len() as f64;
        self.lambda.abs().max(1.0 / self.mu.abs()).powf(1.0 / p)
    }
}

/// Eigen-directions of the monodromy matrix at each orbit point.
pub fn stable_unstable_directions(orbit: &OrbitData) -> Result<OrbitDirections> {
    let p = orbit.period();
    let mut e_u = Vec::with_capacity(p);
    let mut e_s = Vec::with_capacity(p);
    let mut mu = 0.0;
    let mut lambda = 0.0;
    for i in 0..p {
        let ((m, u), (l, s)) = saddle_eigen(orbit.monodromy(i))?;
        if i == 0 {
            mu = m;
            lambda = l;
        }
        e_u.push(u);
        e_s.push(s);
    }
    let mut a = Vec::with_capacity(p);
    let mut b = Vec::with_capacity(p);
    let mut defect: f64 = 0.0;
    for i in 0..p {
        let j = orbit.jacobians[i];
        let next = (i + 1) % p;
        for (e, e_next, out) in [(&e_u, &e_u, &mut a), (&e_s, &e_s, &mut b)] {
            let w = j * e[i];
            let f = w.dot(&e_next[next]);
            defect = defect.max((w - f * e_next[next]).norm() / w.norm());
            out.push(f);
        }
    }
    if defect > INVARIANCE_TOL {
        return Err(Error::NotHyperbolic(format!(
            "eigen-directions are not carried along the orbit (defect {defect:e})"
        )));
    }
    Ok(OrbitDirections {
        e_u,
        e_s,
        a,
        b,
        mu,
        lambda,
        defect,
    })
}

/// Norms of the unit directions in the adapted metrics, built from
/// truncated sums of `m_used` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedMetric {
    pub norm_u: Vec<f64>,
    pub norm_s: Vec<f64>,
    pub m_used: usize,
    pub lambda_t: f64,
}

/// Smallest truncation `m` for which the adapted norms satisfy the one-step
/// inequalities at every orbit point.
///
/// On `E_s(x)` the metric is `|v|_s^2 = sum_{n<m} lambda_t^{-2n} |d phi^n v|^2`
/// and on `E_u(x)` the same with `d phi^{-n}`; along the orbit these reduce
/// to products of the one-step factors.
pub fn adapted_metric(dirs: &OrbitDirections, lambda_t: f64) -> Result<AdaptedMetric> {
    let p = dirs.e_u.len();
    let rate = dirs.rate();
    if !(rate < lambda_t && lambda_t < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda_t = {lambda_t} must lie in ({rate}, 1)"
        )));
    }
    let w = lambda_t.powi(-2);
    let mut sum_s = vec![0.0f64; p];
    let mut sum_u = vec![0.0f64; p];
    // current term of each series: lambda_t^{-2n} |d phi^{+-n} e|^2
    let mut term_s = vec![1.0; p];
    let mut term_u = vec![1.0; p];
    for m in 1..=MAX_METRIC_TERMS {
        for i in 0..p {
            sum_s[i] += term_s[i];
            sum_u[i] += term_u[i];
        }
        let ok = (0..p).all(|i| {
            let next = (i + 1) % p;
            let prev = (i + p - 1) % p;
            let s_ok = dirs.b[i].abs() * sum_s[next].sqrt() <= lambda_t * sum_s[i].sqrt();
            let u_ok = sum_u[prev].sqrt() / dirs.a[prev].abs() <= lambda_t * sum_u[i].sqrt();
            s_ok && u_ok
        });
        if ok {
            return Ok(AdaptedMetric {
                norm_u: sum_u.iter().map(|v| v.sqrt()).collect(),
                norm_s: sum_s.iter().map(|v| v.sqrt()).collect(),
                m_used: m,
                lambda_t,
            });
        }
        // advance both series by one step along the orbit
        let ts = term_s.clone();
        let tu = term_u.clone();
        for i in 0..p {
            let next = (i + 1) % p;
            let prev = (i + p - 1) % p;
            term_s[i] = w * dirs.b[i] * dirs.b[i] * ts[next];
            term_u[i] = w * tu[prev] / (dirs.a[prev] * dirs.a[prev]);
        }
    }
    Err(Error::RateTooTight {
        max_terms: MAX_METRIC_TERMS,
    })
}

/// Directions, adapted norms and adapted charts along an orbit.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub points: Vec<Vec2>,
    pub directions: OrbitDirections,
    pub metric: AdaptedMetric,
    charts: Vec<AffineChart>,
}

impl AdaptedFrame {
    pub fn new(map: &PlanarMap, orbit: &OrbitData, lambda_t: f64) -> Result<Self> {
        let directions = stable_unstable_directions(orbit)?;
        let metric = adapted_metric(&directions, lambda_t)?;
        let charts = (0..orbit.period())
            .map(|i| {
                let basis = Mat2::from_columns(&[
                    directions.e_u[i] / metric.norm_u[i],
                    directions.e_s[i] / metric.norm_s[i],
                ]);
                Ok(AffineChart::new(orbit.points[i], basis, 1.0)?.for_map(map))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points: orbit.points.clone(),
            directions,
            metric,
            charts,
        })
    }

    pub fn period(&self) -> usize {
        self.points.len()
    }

    /// Adapted chart at point `i` rescaled by `delta1`: `x = x_i + delta1 B xi`
    /// where `B` sends the axes to the unit-adapted-norm directions.
    pub fn chart(&self, i: usize, delta1: f64) -> Result<AffineChart> {
        self.charts[i % self.period()].with_scale(delta1)
    }
}
