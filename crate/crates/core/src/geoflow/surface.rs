use std::fmt;
use std::sync::Arc;

use crate::{Error, Result, Vec2};

pub const FD_LAPLACIAN_STEP: f64 = 1e-4;
pub const GRADIENT_CHECK_TOL: f64 = 1e-6;
const GRADIENT_CHECK_STEP: f64 = 1e-5;

type Scalar = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Gradient = Arc<dyn Fn(f64, f64) -> Vec2 + Send + Sync>;

/// Open region of the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartDomain {
    Plane,
    Disk { radius: f64 },
}

impl ChartDomain {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            ChartDomain::Plane => x.is_finite() && y.is_finite(),
            ChartDomain::Disk { radius } => x * x + y * y < radius * radius,
        }
    }

    /// Deterministic points well inside the domain.
    fn probes(&self) -> Vec<(f64, f64)> {
        let reach = match *self {
            ChartDomain::Plane => 1.0,
            ChartDomain::Disk { radius } => 0.8 * radius / std::f64::consts::SQRT_2,
        };
        let n = 5;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let x = reach * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
                let y = reach * (2.0 * j as f64 / (n - 1) as f64 - 1.0);
                // off the symmetry axes of the built-in surfaces
                out.push((x + 0.013 * reach, y - 0.007 * reach));
            }
        }
        out
    }
}

/// The metric `e^{2G(x,y)}(dx^2 + dy^2)` on a chart domain.
#[derive(Clone)]
pub struct IsothermalSurface {
    pub name: String,
    pub domain: ChartDomain,
    g: Scalar,
    grad: Gradient,
    lap: Option<Scalar>,
}

impl fmt::Debug for IsothermalSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IsothermalSurface")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("analytic_laplacian", &self.lap.is_some())
            .finish()
    }
}

impl IsothermalSurface {
    /// Checks the supplied gradient (and Laplacian, when given) against
    /// central differences of `g` at sample points of the domain.
    pub fn new(
        name: impl Into<String>,
        domain: ChartDomain,
        g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, f64) -> Vec2 + Send + Sync + 'static,
        lap: Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
    ) -> Result<Self> {
        let s = Self {
            name: name.into(),
            domain,
            g: Arc::new(g),
            grad: Arc::new(grad),
            lap: lap.map(Arc::from),
        };
        let h = GRADIENT_CHECK_STEP;
        for (x, y) in domain.probes() {
            let fd = Vec2::new(
                (s.g(x + h, y) - s.g(x - h, y)) / (2.0 * h),
                (s.g(x, y + h) - s.g(x, y - h)) / (2.0 * h),
            );
            let an = s.grad(x, y);
            if !((fd - an).norm() <= GRADIENT_CHECK_TOL * an.norm().max(1.0)) {
                return Err(Error::InvalidArgument(format!(
                    "gradient of {} disagrees with finite differences at ({x}, {y}): {an:?} vs {fd:?}",
                    s.name
                )));
            }
            if let Some(lap) = &s.lap {
                let (an, fd) = (lap(x, y), s.fd_laplacian(x, y));
                if !((an - fd).abs() <= 1e-4 * an.abs().max(1.0)) {
                    return Err(Error::InvalidArgument(format!(
                        "Laplacian of {} disagrees with finite differences at ({x}, {y}): {an} vs {fd}",
                        s.name
                    )));
                }
            }
        }
        Ok(s)
    }

    /// Drops the analytic Laplacian so curvature uses finite differences.
    pub fn without_laplacian(mut self) -> Self {
        self.lap = None;
        self
    }

    pub fn has_laplacian(&self) -> bool {
        self.lap.is_some()
    }

    pub fn g(&self, x: f64, y: f64) -> f64 {
        (self.g)(x, y)
    }

    pub fn grad(&self, x: f64, y: f64) -> Vec2 {
        (self.grad)(x, y)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.domain.contains(x, y)
    }

    pub(crate) fn check_domain(&self, x: f64, y: f64) -> Result<()> {
        if self.contains(x, y) {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!("({x}, {y}) is outside the chart of {}", self.name)))
        }
    }

    fn fd_laplacian(&self, x: f64, y: f64) -> f64 {
        let h = FD_LAPLACIAN_STEP;
        let c = self.g(x, y);
        (self.g(x + h, y) + self.g(x - h, y) + self.g(x, y + h) + self.g(x, y - h) - 4.0 * c) / (h * h)
    }

    pub fn laplacian(&self, x: f64, y: f64) -> f64 {
        match &self.lap {
            Some(lap) => lap(x, y),
            None => self.fd_laplacian(x, y),
        }
    }

    /// Gauss curvature `-e^{-2G} Laplacian(G)`.
    pub fn curvature(&self, x: f64, y: f64) -> Result<f64> {
        self.check_domain(x, y)?;
        Ok(self.curvature_unchecked(x, y))
    }

    pub(crate) fn curvature_unchecked(&self, x: f64, y: f64) -> f64 {
        -(-2.0 * self.g(x, y)).exp() * self.laplacian(x, y)
    }

    /// Smallest and largest curvature on an `n x n` grid over the domain
    /// (the disk case samples radii up to 0.95 of the radius).
    pub fn curvature_range(&self, n: usize) -> Result<(f64, f64)> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
        }
        let reach = match self.domain {
            ChartDomain::Plane => 2.0,
            ChartDomain::Disk { radius } => 0.95 * radius,
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                let x = reach * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
                let y = reach * (2.0 * j as f64 / (n - 1) as f64 - 1.0);
                if !self.contains(x, y) || (matches!(self.domain, ChartDomain::Disk { .. }) && x.hypot(y) > reach) {
                    continue;
                }
                let k = self.curvature_unchecked(x, y);
                lo = lo.min(k);
                hi = hi.max(k);
            }
        }
        Ok((lo, hi))
    }

    /// Fails with `InvalidBounds` unless the sampled curvature is negative.
    pub fn check_negative_curvature(&self, n: usize) -> Result<()> {
        let (_, hi) = self.curvature_range(n)?;
        if hi < 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidBounds(format!("{} has curvature {hi} >= 0", self.name)))
        }
    }

    pub fn flat() -> Self {
        Self::constant(0.0)
    }

    /// `G = c`: flat, with speed `e^{-c}` in the chart.
    pub fn constant(c: f64) -> Self {
        Self::new(
            if c == 0.0 { "flat".to_string() } else { format!("constant({c})") },
            ChartDomain::Plane,
            move |_, _| c,
            |_, _| Vec2::zeros(),
            Some(Box::new(|_, _| 0.0)),
        )
        .expect("constant exponent")
    }

    /// The Poincare disk, `G = log(2 / (1 - r^2))`, curvature -1.
    pub fn poincare() -> Self {
        Self::new(
            "poincare",
            ChartDomain::Disk { radius: 1.0 },
            |x, y| (2.0 / (1.0 - x * x - y * y)).ln(),
            |x, y| {
                let q = 1.0 - x * x - y * y;
                Vec2::new(2.0 * x / q, 2.0 * y / q)
            },
            Some(Box::new(|x, y| {
                let q = 1.0 - x * x - y * y;
                4.0 / (q * q)
            })),
        )
        .expect("poincare exponent")
    }

    /// `G = c (x^2 + y^2) / 2`, curvature `-2c` at the origin.
    pub fn quadratic(c: f64) -> Self {
        Self::new(
            format!("quadratic({c})"),
            ChartDomain::Plane,
            move |x, y| 0.5 * c * (x * x + y * y),
            move |x, y| Vec2::new(c * x, c * y),
            Some(Box::new(move |_, _| 2.0 * c)),
        )
        .expect("quadratic exponent")
    }

    /// `G = amplitude * exp(-r^2 / (2 width^2))` on the plane.
    pub fn gaussian_bump(amplitude: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gaussian bump needs finite amplitude and width > 0, got {amplitude}, {width}"
            )));
        }
        let w2 = width * width;
        let g = move |x: f64, y: f64| amplitude * (-(x * x + y * y) / (2.0 * w2)).exp();
        Self::new(
            format!("gaussian-bump({amplitude}, {width})"),
            ChartDomain::Plane,
            g,
            move |x, y| -g(x, y) / w2 * Vec2::new(x, y),
            Some(Box::new(move |x, y| g(x, y) * ((x * x + y * y) / (w2 * w2) - 2.0 / w2))),
        )
    }

    /// The Poincare disk with a gaussian bump of height `eps` and width 0.25
    /// centred at (0.2, -0.1) added to `G`: variable negative curvature for
    /// small `eps`.
    pub fn perturbed_poincare(eps: f64) -> Result<Self> {
        if !eps.is_finite() {
            return Err(Error::InvalidArgument(format!("eps must be finite, got {eps}")));
        }
        let (cx, cy, w2) = (0.2, -0.1, 0.0625);
        let bump = move |x: f64, y: f64| {
            let (dx, dy) = (x - cx, y - cy);
            eps * (-(dx * dx + dy * dy) / (2.0 * w2)).exp()
        };
        Self::new(
            format!("perturbed-poincare({eps})"),
            ChartDomain::Disk { radius: 1.0 },
            move |x, y| (2.0 / (1.0 - x * x - y * y)).ln() + bump(x, y),
            move |x, y| {
                let q = 1.0 - x * x - y * y;
                let b = bump(x, y);
                Vec2::new(2.0 * x / q - b * (x - cx) / w2, 2.0 * y / q - b * (y - cy) / w2)
            },
            Some(Box::new(move |x, y| {
                let q = 1.0 - x * x - y * y;
                let (dx, dy) = (x - cx, y - cy);
                4.0 / (q * q) + bump(x, y) * ((dx * dx + dy * dy) / (w2 * w2) - 2.0 / w2)
            })),
        )
    }
}
