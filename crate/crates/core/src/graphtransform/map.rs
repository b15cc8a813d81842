use std::fmt;
use std::sync::Arc;

use crate::numcore::NEWTON_MAX_ITER;
use crate::{Error, Mat2, Result, Vec2};

pub type MapFn = Arc<dyn Fn(Vec2) -> Option<Vec2> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(Vec2) -> Option<Mat2> + Send + Sync>;
/// `(from, to) -> to - from`, for phase spaces with a periodic coordinate.
pub type DisplacementFn = Arc<dyn Fn(Vec2, Vec2) -> Vec2 + Send + Sync>;

const FD_STEP: f64 = 1e-6;
const INVERSE_TOL: f64 = 1e-12;

/// A planar diffeomorphism germ. `None` from an evaluator means the point is
/// outside the map's domain.
#[derive(Clone)]
pub struct PlanarMap {
    forward: MapFn,
    inverse: Option<MapFn>,
    jacobian: Option<JacobianFn>,
    displacement: Option<DisplacementFn>,
    fixed_point: Vec2,
}

impl fmt::Debug for PlanarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlanarMap")
            .field("fixed_point", &self.fixed_point)
            .field("inverse", &self.inverse.is_some())
            .field("jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl PlanarMap {
    pub fn new(forward: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static) -> Self {
        Self::partial(move |x| Some(forward(x)))
    }

    pub fn partial(forward: impl Fn(Vec2) -> Option<Vec2> + Send + Sync + 'static) -> Self {
        Self {
            forward: Arc::new(forward),
            inverse: None,
            jacobian: None,
            displacement: None,
            fixed_point: Vec2::zeros(),
        }
    }

    /// The linear map `x -> m x` with exact inverse and Jacobian.
    pub fn linear(m: Mat2) -> Result<Self> {
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular linear map".into()))?;
        Ok(Self::new(move |x| m * x)
            .with_inverse(move |y| inv * y)
            .with_jacobian(move |_| m))
    }

    pub fn with_inverse(self, inverse: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static) -> Self {
        self.with_partial_inverse(move |y| Some(inverse(y)))
    }

    pub fn with_partial_inverse(
        mut self,
        inverse: impl Fn(Vec2) -> Option<Vec2> + Send + Sync + 'static,
    ) -> Self {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn with_jacobian(self, jacobian: impl Fn(Vec2) -> Mat2 + Send + Sync + 'static) -> Self {
        self.with_partial_jacobian(move |x| Some(jacobian(x)))
    }

    pub fn with_partial_jacobian(
        mut self,
        jacobian: impl Fn(Vec2) -> Option<Mat2> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn with_displacement(
        mut self,
        displacement: impl Fn(Vec2, Vec2) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        self.displacement = Some(Arc::new(displacement));
        self
    }

    pub fn with_fixed_point(mut self, p: Vec2) -> Self {
        self.fixed_point = p;
        self
    }

    pub fn fixed_point(&self) -> Vec2 {
        self.fixed_point
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub(crate) fn displacement_fn(&self) -> Option<DisplacementFn> {
        self.displacement.clone()
    }

    pub fn displacement(&self, from: Vec2, to: Vec2) -> Vec2 {
        match &self.displacement {
            Some(d) => d(from, to),
            None => to - from,
        }
    }

    pub fn try_forward(&self, x: Vec2) -> Option<Vec2> {
        (self.forward)(x).filter(|y| y.iter().all(|v| v.is_finite()))
    }

    pub fn forward(&self, x: Vec2) -> Result<Vec2> {
        self.try_forward(x).ok_or_else(|| {
            Error::OutOfDomain(format!("map undefined at ({}, {})", x[0], x[1]))
        })
    }

    /// Analytic Jacobian when supplied, central differences otherwise.
    pub fn jacobian(&self, x: Vec2) -> Result<Mat2> {
        if let Some(j) = &self.jacobian {
            return j(x).ok_or_else(|| {
                Error::OutOfDomain(format!("Jacobian undefined at ({}, {})", x[0], x[1]))
            });
        }
        self.fd_jacobian(x, FD_STEP)
    }

    /// Central-difference Jacobian, measuring image differences with the
    /// map's displacement rule.
    pub fn fd_jacobian(&self, x: Vec2, h: f64) -> Result<Mat2> {
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
        }
        let mut jac = Mat2::zeros();
        for k in 0..2 {
            let mut dx = Vec2::zeros();
            dx[k] = h;
            let lo = self.forward(x - dx)?;
            let hi = self.forward(x + dx)?;
            jac.set_column(k, &(self.displacement(lo, hi) / (2.0 * h)));
        }
        Ok(jac)
    }

    /// `phi^{-1}(y)`: the analytic inverse when available, otherwise Newton
    /// on the forward map started at `guess` (or at the linearization about
    /// the fixed point).
    pub fn inverse(&self, y: Vec2, guess: Option<Vec2>) -> Result<Vec2> {
        if let Some(inv) = &self.inverse {
            return inv(y)
                .filter(|x| x.iter().all(|v| v.is_finite()))
                .ok_or(Error::InversionFailure { x: y[0], y: y[1] });
        }
        let x0 = match guess {
            Some(g) => g,
            None => {
                let p = self.fixed_point;
                let j = self.jacobian(p)?;
                let jinv = j
                    .try_inverse()
                    .ok_or(Error::InversionFailure { x: y[0], y: y[1] })?;
                p + jinv * self.displacement(p, y)
            }
        };
        newton_inverse(
            |x| self.try_forward(x).map(|fx| self.displacement(y, fx)),
            |x| self.jacobian(x).ok(),
            x0,
            INVERSE_TOL * y.norm().max(1.0),
        )
        .ok_or(Error::InversionFailure { x: y[0], y: y[1] })
    }

    /// `psi o self`, with Jacobians composed by the chain rule.
    pub fn then(&self, next: &PlanarMap) -> PlanarMap {
        let a = self.clone();
        let b = next.clone();
        let (a2, b2) = (a.clone(), b.clone());
        let mut out = PlanarMap::partial(move |x| a.try_forward(x).and_then(|y| b.try_forward(y)))
            .with_partial_jacobian(move |x| {
                let y = a2.try_forward(x)?;
                Some(b2.jacobian(y).ok()? * a2.jacobian(x).ok()?)
            })
            .with_fixed_point(self.fixed_point);
        out.displacement = next.displacement.clone();
        if self.inverse.is_some() && next.inverse.is_some() {
            let (a3, b3) = (self.clone(), next.clone());
            out.inverse = Some(Arc::new(move |z| {
                let y = b3.inverse(z, None).ok()?;
                a3.inverse(y, None).ok()
            }));
        }
        out
    }
}

/// Damped Newton for `residual(x) = 0`.
pub(crate) fn newton_inverse(
    residual: impl Fn(Vec2) -> Option<Vec2>,
    jacobian: impl Fn(Vec2) -> Option<Mat2>,
    x0: Vec2,
    tol: f64,
) -> Option<Vec2> {
    let mut x = x0;
    let mut r = residual(x)?;
    for _ in 0..NEWTON_MAX_ITER {
        if r.norm() <= tol {
            return Some(x);
        }
        let step = jacobian(x)?.try_inverse()? * r;
        let mut t = 1.0;
        loop {
            let cand = x - t * step;
            if let Some(rc) = residual(cand) {
                if rc.norm() < r.norm() || t < 1e-3 {
                    x = cand;
                    r = rc;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-9 {
                return None;
            }
        }
    }
    (r.norm() <= tol * 10.0).then_some(x)
}

/// Affine chart `x = origin + scale * basis * xi`.
#[derive(Clone)]
pub struct AffineChart {
    origin: Vec2,
    basis: Mat2,
    basis_inv: Mat2,
    scale: f64,
    displacement: Option<DisplacementFn>,
}

impl fmt::Debug for AffineChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AffineChart")
            .field("origin", &self.origin)
            .field("basis", &self.basis)
            .field("scale", &self.scale)
            .finish()
    }
}

impl AffineChart {
    pub fn new(origin: Vec2, basis: Mat2, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!("chart scale must be > 0, got {scale}")));
        }
        let basis_inv = basis
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("degenerate chart basis".into()))?;
        Ok(Self {
            origin,
            basis,
            basis_inv,
            scale,
            displacement: None,
        })
    }

    pub fn identity() -> Self {
        Self::new(Vec2::zeros(), Mat2::identity(), 1.0).expect("identity chart")
    }

    /// Use the displacement rule of `map` when measuring offsets from the origin.
    pub fn for_map(mut self, map: &PlanarMap) -> Self {
        self.displacement = map.displacement_fn();
        self
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn basis(&self) -> Mat2 {
        self.basis
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        let mut c = Self::new(self.origin, self.basis, scale)?;
        c.displacement = self.displacement.clone();
        Ok(c)
    }

    pub fn to_normalized(&self, x: Vec2) -> Vec2 {
        let d = match &self.displacement {
            Some(f) => f(self.origin, x),
            None => x - self.origin,
        };
        self.basis_inv * d / self.scale
    }

    pub fn from_normalized(&self, xi: Vec2) -> Vec2 {
        self.origin + self.scale * (self.basis * xi)
    }

    /// Linear part of `to_normalized`.
    pub fn linear_to_normalized(&self) -> Mat2 {
        self.basis_inv / self.scale
    }
}

/// `(2 x1 + x2^2 / 2, x2 / 2 + x1^2 / 2)`, a hyperbolic fixed point at the
/// origin with quadratic nonlinearity.
pub fn figure2_map() -> PlanarMap {
    PlanarMap::new(|x| {
        Vec2::new(
            2.0 * x[0] + 0.5 * x[1] * x[1],
            0.5 * x[1] + 0.5 * x[0] * x[0],
        )
    })
    .with_jacobian(|x| Mat2::new(2.0, x[1], x[0], 0.5))
}
