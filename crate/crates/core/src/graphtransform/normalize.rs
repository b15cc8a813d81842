use crate::graphtransform::map::{newton_inverse, AffineChart, PlanarMap};
use crate::{Error, Mat2, Result, Vec2};

pub const DEFAULT_DELTA_TARGET: f64 = 0.05;
pub const DEFAULT_REGULARITY: usize = 2;

/// Distance from the unit circle below which a rate counts as neutral.
pub const NEUTRAL_RATE_TOL: f64 = 1e-9;

const FIXED_POINT_TOL: f64 = 1e-12;
const OFF_DIAGONAL_TOL: f64 = 1e-10;
const SAMPLE_GRID: usize = 21;

/// Rates and bounds of a hyperbolic map.
///
/// `lambda_t`, `mu_t` are the intermediate rates with
/// `lambda < lambda_t < 1 < mu_t < mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicityParams {
    pub lambda: f64,
    pub mu: f64,
    pub c0: f64,
    pub delta: f64,
    pub n_reg: usize,
    pub lambda_t: f64,
    pub mu_t: f64,
}

impl HyperbolicityParams {
    /// Rates with the default intermediate rates `(1 + 2 lambda) / 3` and
    /// `3 mu / (mu + 2)`, which give `2/3` and `3/2` for `lambda = 1/2`,
    /// `mu = 2`.
    pub fn new(lambda: f64, mu: f64, n_reg: usize) -> Result<Self> {
        let (lambda_t, mu_t) = default_tildes(lambda, mu);
        let p = Self {
            lambda,
            mu,
            c0: mu.max(1.0 / lambda),
            delta: 0.0,
            n_reg,
            lambda_t,
            mu_t,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_tildes(mut self, lambda_t: f64, mu_t: f64) -> Result<Self> {
        self.lambda_t = lambda_t;
        self.mu_t = mu_t;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.lambda
            && self.lambda < self.lambda_t
            && self.lambda_t < 1.0
            && 1.0 < self.mu_t
            && self.mu_t < self.mu
            && self.c0 >= self.mu.max(1.0 / self.lambda) * (1.0 - 1e-12)
            && self.delta >= 0.0
            && self.n_reg >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("inconsistent hyperbolicity parameters {self:?}")))
        }
    }

    /// Contraction factor of the graph transform in the linear case.
    pub fn transform_rate(&self) -> f64 {
        self.lambda / self.mu
    }
}

impl Default for HyperbolicityParams {
    fn default() -> Self {
        Self::new(0.5, 2.0, DEFAULT_REGULARITY).expect("default rates are valid")
    }
}

pub fn default_tildes(lambda: f64, mu: f64) -> (f64, f64) {
    ((1.0 + 2.0 * lambda) / 3.0, 3.0 * mu / (mu + 2.0))
}

/// A planar map written in charts where the reference point sits at the
/// origin and the differential there is diagonal.
///
/// The source and target charts coincide for a fixed point; along an orbit
/// they are the charts of consecutive points.
#[derive(Debug, Clone)]
pub struct NormalizedMap {
    map: PlanarMap,
    source: AffineChart,
    target: AffineChart,
    rates: (f64, f64),
    params: HyperbolicityParams,
}

impl NormalizedMap {
    /// Conjugate `map` by the given charts and check the normalization at 0.
    pub fn from_charts(
        map: PlanarMap,
        source: AffineChart,
        target: AffineChart,
        params: HyperbolicityParams,
    ) -> Result<Self> {
        let mut nm = Self {
            map,
            source,
            target,
            rates: (0.0, 0.0),
            params,
        };
        // an orbit known to 1e-12 moves the origin by that much over the scale
        let zero_image = nm.forward(Vec2::zeros())?;
        if zero_image.norm() > FIXED_POINT_TOL / nm.source.scale().min(1.0) {
            return Err(Error::InvalidArgument(format!(
                "normalized map moves the origin by {:e}",
                zero_image.norm()
            )));
        }
        let d = nm.jacobian(Vec2::zeros())?;
        let off = d[(0, 1)].abs().max(d[(1, 0)].abs());
        let tol = OFF_DIAGONAL_TOL * d[(0, 0)].abs().max(1.0);
        if off > tol {
            return Err(Error::InvalidArgument(format!(
                "differential at the origin is not diagonal (off-diagonal {off:e})"
            )));
        }
        let (au, as_) = (d[(0, 0)], d[(1, 1)]);
        check_saddle(au, as_)?;
        nm.rates = (au, as_);
        Ok(nm)
    }

    /// A map that is already normalized in its own coordinates.
    pub fn already_normalized(map: PlanarMap, params: HyperbolicityParams) -> Result<Self> {
        let chart = AffineChart::identity().for_map(&map);
        Self::from_charts(map, chart.clone(), chart, params)
    }

    pub fn map(&self) -> &PlanarMap {
        &self.map
    }

    pub fn source(&self) -> &AffineChart {
        &self.source
    }

    pub fn target(&self) -> &AffineChart {
        &self.target
    }

    pub fn params(&self) -> &HyperbolicityParams {
        &self.params
    }

    pub fn scale(&self) -> f64 {
        self.source.scale()
    }

    /// Signed diagonal entries `(a_u, a_s)` of the differential at the origin.
    pub fn rates(&self) -> (f64, f64) {
        self.rates
    }

    pub fn with_params(mut self, params: HyperbolicityParams) -> Self {
        self.params = params;
        self
    }

    pub fn try_forward(&self, xi: Vec2) -> Option<Vec2> {
        let y = self.map.try_forward(self.source.from_normalized(xi))?;
        Some(self.target.to_normalized(y))
    }

    pub fn forward(&self, xi: Vec2) -> Result<Vec2> {
        self.try_forward(xi).ok_or_else(|| {
            Error::OutOfDomain(format!("normalized map undefined at ({}, {})", xi[0], xi[1]))
        })
    }

    pub fn jacobian(&self, xi: Vec2) -> Result<Mat2> {
        let j = self.map.jacobian(self.source.from_normalized(xi))?;
        Ok(self.target.linear_to_normalized() * j * self.source.basis() * self.source.scale())
    }

    pub fn inverse(&self, eta: Vec2) -> Result<Vec2> {
        if self.map.has_inverse() {
            let x = self.map.inverse(self.target.from_normalized(eta), None)?;
            return Ok(self.source.to_normalized(x));
        }
        let x0 = Vec2::new(eta[0] / self.rates.0, eta[1] / self.rates.1);
        newton_inverse(
            |xi| self.try_forward(xi).map(|y| y - eta),
            |xi| self.jacobian(xi).ok(),
            x0,
            1e-13 * eta.norm().max(1.0),
        )
        .ok_or(Error::InversionFailure { x: eta[0], y: eta[1] })
    }

    /// The same map in charts rescaled to `delta1`.
    pub fn rescaled(&self, delta1: f64) -> Result<Self> {
        let source = self.source.with_scale(delta1)?;
        let target = self.target.with_scale(delta1)?;
        Self::from_charts(self.map.clone(), source, target, self.params)
    }

    /// This map followed by `next`, as a normalized map between the source
    /// chart of `self` and the target chart of `next`.
    pub fn then(&self, next: &NormalizedMap) -> Result<NormalizedMap> {
        Self::from_charts(
            self.map.then(&next.map),
            self.source.clone(),
            next.target.clone(),
            self.params,
        )
    }
}

fn check_saddle(au: f64, as_: f64) -> Result<()> {
    if (au.abs() - 1.0).abs() < NEUTRAL_RATE_TOL || (as_.abs() - 1.0).abs() < NEUTRAL_RATE_TOL {
        return Err(Error::NotHyperbolic(format!(
            "eigenvalue of unit modulus ({au}, {as_})"
        )));
    }
    if !(au.abs() > 1.0 && as_.abs() < 1.0 && as_ != 0.0) {
        return Err(Error::NotHyperbolic(format!(
            "rates ({au}, {as_}) are not an expanding/contracting pair"
        )));
    }
    Ok(())
}

/// Real eigen-pairs `(expanding, contracting)` of a 2x2 saddle matrix, with
/// unit eigenvectors whose largest component is positive.
pub fn saddle_eigen(j: Mat2) -> Result<((f64, Vec2), (f64, Vec2))> {
    let (a, b, c, d) = (j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);
    let half_tr = 0.5 * (a + d);
    let det = a * d - b * c;
    let disc = half_tr * half_tr - det;
    let scale = half_tr.abs().max(det.abs().sqrt()).max(1e-300);
    if disc < 0.0 {
        return Err(Error::NotHyperbolic(format!("complex eigenvalues of {j:?}")));
    }
    if disc.sqrt() <= 1e-12 * scale {
        return Err(Error::NotHyperbolic(format!("repeated eigenvalue of {j:?}")));
    }
    // cancellation-free roots
    let s = disc.sqrt();
    let q = if half_tr >= 0.0 { half_tr + s } else { half_tr - s };
    let (e1, e2) = (q, det / q);
    let (eu, es) = if e1.abs() >= e2.abs() { (e1, e2) } else { (e2, e1) };
    check_saddle(eu, es)?;
    let vec_for = |e: f64| {
        let v1 = Vec2::new(b, e - a);
        let v2 = Vec2::new(e - d, c);
        let mut v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        v /= v.norm();
        let lead = if v[0].abs() >= v[1].abs() { v[0] } else { v[1] };
        if lead < 0.0 {
            v = -v;
        }
        v
    };
    Ok(((eu, vec_for(eu)), (es, vec_for(es))))
}

/// Normalize the fixed point of `map` in its eigenbasis, choosing the scale
/// `delta1` so that the estimated nonlinearity is at most `delta_target`.
pub fn normalize_fixed_point(
    map: &PlanarMap,
    params: &HyperbolicityParams,
    delta_target: f64,
) -> Result<NormalizedMap> {
    if !(delta_target > 0.0) {
        return Err(Error::InvalidArgument(format!("delta target must be > 0, got {delta_target}")));
    }
    let base = eigen_normalized(map, params, 1.0)?;
    let (delta1, d) = select_scale(delta_target, |delta1| {
        estimate_delta(&base.rescaled(delta1)?, params.n_reg)
    })?;
    finish(base.rescaled(delta1)?, params, d)
}

/// Search for the chart scale `delta1 <= 1` whose nonlinearity estimate
/// `measure(delta1)` is as close to `delta_target` as possible from below.
/// Returns the scale and its estimate.
pub(crate) fn select_scale(
    delta_target: f64,
    mut measure: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let mut delta1: f64 = 1.0;
    let mut best = None;
    for _ in 0..80 {
        let d = match measure(delta1) {
            Ok(d) => d,
            Err(Error::OutOfDomain(_)) | Err(Error::InversionFailure { .. }) => {
                delta1 *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };
        if d <= delta_target * (1.0 + 1e-6) {
            best = Some((delta1, d));
            if d >= delta_target * (1.0 - 1e-6) || delta1 >= 1.0 {
                break;
            }
        }
        let next = if d > 0.0 { delta1 * delta_target / d } else { 1.0 };
        // bounded moves keep the iteration stable for non-homogeneous maps
        delta1 = next.clamp(delta1 * 0.1, (delta1 * 10.0).min(1.0));
    }
    best.ok_or_else(|| Error::DeltaTooLarge(format!("no chart scale reaches delta <= {delta_target}")))
}

/// Normalize with an explicit chart scale `delta1`.
pub fn normalize_fixed_point_with_scale(
    map: &PlanarMap,
    params: &HyperbolicityParams,
    delta1: f64,
) -> Result<NormalizedMap> {
    let nm = eigen_normalized(map, params, delta1)?;
    let d = estimate_delta(&nm, params.n_reg)?;
    finish(nm, params, d)
}

fn eigen_normalized(
    map: &PlanarMap,
    params: &HyperbolicityParams,
    delta1: f64,
) -> Result<NormalizedMap> {
    let p = map.fixed_point();
    let image = map.forward(p)?;
    if map.displacement(p, image).norm() > 1e-9 * p.norm().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "({}, {}) is not a fixed point of the map",
            p[0], p[1]
        )));
    }
    let j = map.jacobian(p)?;
    let ((_, eu), (_, es)) = saddle_eigen(j)?;
    let chart = AffineChart::new(p, Mat2::from_columns(&[eu, es]), delta1)?.for_map(map);
    NormalizedMap::from_charts(map.clone(), chart.clone(), chart, *params)
}

fn finish(nm: NormalizedMap, requested: &HyperbolicityParams, delta: f64) -> Result<NormalizedMap> {
    let (au, as_) = nm.rates();
    let (lambda, mu) = (as_.abs(), au.abs());
    let mut params = HyperbolicityParams::new(lambda, mu, requested.n_reg)?;
    params.c0 = requested.c0.max(params.c0);
    if lambda < requested.lambda_t
        && requested.lambda_t < 1.0
        && 1.0 < requested.mu_t
        && requested.mu_t < mu
    {
        params.lambda_t = requested.lambda_t;
        params.mu_t = requested.mu_t;
    }
    params.delta = delta;
    Ok(nm.with_params(params))
}

/// Largest finite-difference partial derivative of orders `2..=n_reg + 1` of
/// either component of the normalized map over a 21 x 21 grid of the unit
/// square.
pub fn estimate_delta(nm: &NormalizedMap, n_reg: usize) -> Result<f64> {
    if n_reg == 0 {
        return Err(Error::InvalidArgument("regularity order must be >= 1".into()));
    }
    let mut best: f64 = 0.0;
    for order in 2..=(n_reg + 1) {
        let h = 0.01 * order as f64;
        for i in 0..SAMPLE_GRID {
            for k in 0..SAMPLE_GRID {
                let x = Vec2::new(grid_coord(i), grid_coord(k));
                for a in 0..=order {
                    let v = mixed_partial(nm, x, a, order - a, h)?;
                    best = best.max(v[0].abs()).max(v[1].abs());
                }
            }
        }
    }
    Ok(best)
}

fn grid_coord(i: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / (SAMPLE_GRID - 1) as f64
}

fn stencil(order: usize, h: f64) -> Vec<(f64, f64)> {
    let mut coeff = 1.0;
    let mut out = Vec::with_capacity(order + 1);
    for j in 0..=order {
        if j > 0 {
            coeff = -coeff * (order + 1 - j) as f64 / j as f64;
        }
        let offset = (order as f64 / 2.0 - j as f64) * h;
        out.push((offset, coeff / h.powi(order as i32)));
    }
    out
}

fn mixed_partial(nm: &NormalizedMap, x: Vec2, a: usize, b: usize, h: f64) -> Result<Vec2> {
    let mut acc = Vec2::zeros();
    for (o1, c1) in stencil(a, h) {
        for (o2, c2) in stencil(b, h) {
            acc += c1 * c2 * nm.forward(x + Vec2::new(o1, o2))?;
        }
    }
    Ok(acc)
}
