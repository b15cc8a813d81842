use crate::billiard::table::{BilliardTable, PhasePoint, TableKind, GLANCING_EPS};
use crate::graphtransform::PlanarMap;
use crate::{Error, Mat2, Result, Vec2};

const MIN_HIT_DISTANCE: f64 = 1e-12;

/// A realized bounce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounce {
    pub from: PhasePoint,
    pub to: PhasePoint,
    /// Distance travelled between the two boundary points.
    pub length: f64,
    pub k_from: f64,
    pub k_to: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BilliardStep {
    Hit(Bounce),
    Escape,
    Glancing,
}

impl BilliardStep {
    pub fn hit(self) -> Option<Bounce> {
        match self {
            BilliardStep::Hit(b) => Some(b),
            _ => None,
        }
    }
}

/// Outgoing unit velocity `sigma v + sqrt(1 - sigma^2) n`.
pub fn outgoing_direction(table: &BilliardTable, p: PhasePoint) -> Result<Vec2> {
    let b = table.boundary_data(p.component, p.theta)?;
    Ok(p.sigma * b.v + (1.0 - p.sigma * p.sigma).max(0.0).sqrt() * b.n)
}

/// One step of the billiard ball map.
pub fn billiard_map(table: &BilliardTable, p: PhasePoint) -> Result<BilliardStep> {
    if !(p.sigma.abs() < 1.0 - GLANCING_EPS) {
        return Ok(BilliardStep::Glancing);
    }
    let start = table.boundary_data(p.component, p.theta)?;
    let w = outgoing_direction(table, p)?;

    let mut best: Option<(f64, usize)> = None;
    for (j, disk) in table.disks().iter().enumerate() {
        let d = start.x - disk.center;
        let b = w.dot(&d);
        let t = if j == p.component {
            // the start point lies on this circle: the other root is -2 <w, d>
            match table.kind() {
                TableKind::InteriorDisk => -2.0 * b,
                TableKind::ExteriorDisks => continue,
            }
        } else {
            let disc = b * b - (d.norm_squared() - disk.radius * disk.radius);
            if disc < 0.0 {
                continue;
            }
            let t = -b - disc.sqrt();
            if t <= 0.0 {
                continue;
            }
            t
        };
        if best.map_or(true, |(tb, _)| t < tb) {
            best = Some((t, j));
        }
    }

    let Some((t, j)) = best else {
        return match table.kind() {
            TableKind::ExteriorDisks => Ok(BilliardStep::Escape),
            TableKind::InteriorDisk => Err(Error::DegenerateRay(0.0)),
        };
    };
    if t < MIN_HIT_DISTANCE {
        return Err(Error::DegenerateRay(t));
    }
    let hit = start.x + t * w;
    let theta2 = table.theta_of(j, hit)?;
    let end = table.boundary_data(j, theta2)?;
    // reflection keeps the tangential component
    let sigma2 = w.dot(&end.v);
    if sigma2.abs() >= 1.0 - GLANCING_EPS {
        return Ok(BilliardStep::Glancing);
    }
    Ok(BilliardStep::Hit(Bounce {
        from: p,
        to: PhasePoint::new(j, theta2, sigma2),
        length: t,
        k_from: start.k,
        k_to: end.k,
    }))
}

/// Differential of the billiard map in `(theta, sigma)` coordinates from
/// the lengths, curvatures and momenta of a realized bounce.
pub fn differential_of(b: &Bounce) -> Mat2 {
    let (l, k1, k2) = (b.length, b.k_from, b.k_to);
    let c1 = (1.0 - b.from.sigma * b.from.sigma).sqrt();
    let c2 = (1.0 - b.to.sigma * b.to.sigma).sqrt();
    Mat2::new(
        (l * k1 - c1) / c2,
        -l / (c1 * c2),
        k1 * c2 + k2 * c1 - l * k1 * k2,
        (l * k2 - c2) / c1,
    )
}

pub fn billiard_differential(table: &BilliardTable, p: PhasePoint) -> Result<Mat2> {
    match billiard_map(table, p)? {
        BilliardStep::Hit(b) => Ok(differential_of(&b)),
        BilliardStep::Escape => Err(Error::Undefined("billiard map escapes".into())),
        BilliardStep::Glancing => Err(Error::Undefined("billiard map is glancing".into())),
    }
}

/// Bounces starting at `p`, stopping early at escape or glancing.
pub fn trajectory(table: &BilliardTable, p: PhasePoint, bounces: usize) -> Result<Vec<Bounce>> {
    let mut out = Vec::with_capacity(bounces);
    let mut q = p;
    for _ in 0..bounces {
        match billiard_map(table, q)? {
            BilliardStep::Hit(b) => {
                q = b.to;
                out.push(b);
            }
            _ => break,
        }
    }
    Ok(out)
}

/// Hyperbolicity of a period-2 orbit of length `l` between boundary points
/// of curvatures `k1`, `k2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period2Report {
    pub length: f64,
    pub k1: f64,
    pub k2: f64,
    pub trace: f64,
    /// `(1 - l k1)(1 - l k2)`; hyperbolic iff outside `[0, 1]`.
    pub product: f64,
    pub hyperbolic: bool,
}

pub fn period2_hyperbolic(length: f64, k1: f64, k2: f64) -> Result<Period2Report> {
    if !(length > 0.0) {
        return Err(Error::InvalidArgument(format!("orbit length must be > 0, got {length}")));
    }
    let trace = 2.0 + 4.0 * length * (length * k1 * k2 - k1 - k2);
    let product = (1.0 - length * k1) * (1.0 - length * k2);
    let hyperbolic = trace.abs() > 2.0;
    debug_assert_eq!(hyperbolic, !(0.0..=1.0).contains(&product));
    Ok(Period2Report {
        length,
        k1,
        k2,
        trace,
        product,
        hyperbolic,
    })
}

/// `|v|^2 = (1 - sigma^2) v_theta^2 + v_sigma^2 / (1 - sigma^2)`.
pub fn cone_norm(sigma: f64, v: Vec2) -> f64 {
    let c = 1.0 - sigma * sigma;
    (c * v[0] * v[0] + v[1] * v[1] / c).sqrt()
}

/// The billiard map on a single planar coordinate system.
///
/// Component `c` occupies the strip around `c * stride` of the first
/// coordinate, so `(c * stride + theta, sigma)` encodes a phase point. The
/// inverse comes from time reversal, `phi^{-1} = R phi R` with
/// `R(theta, sigma) = (theta, -sigma)`.
#[derive(Debug, Clone)]
pub struct PhaseCoordinates {
    table: BilliardTable,
    stride: f64,
}

impl PhaseCoordinates {
    pub fn new(table: &BilliardTable) -> Self {
        let longest = (0..table.disks().len())
            .map(|c| table.component_length(c).unwrap_or(0.0))
            .fold(0.0, f64::max);
        Self {
            table: table.clone(),
            stride: 2.0 * longest.max(1.0),
        }
    }

    pub fn stride(&self) -> f64 {
        self.stride
    }

    pub fn encode(&self, p: PhasePoint) -> Vec2 {
        Vec2::new(p.component as f64 * self.stride + p.theta, p.sigma)
    }

    pub fn decode(&self, x: Vec2) -> Option<PhasePoint> {
        let c = (x[0] / self.stride).round();
        if c < 0.0 || c as usize >= self.table.disks().len() {
            return None;
        }
        let c = c as usize;
        let theta = self.table.reduce_theta(c, x[0] - c as f64 * self.stride).ok()?;
        Some(PhasePoint::new(c, theta, x[1]))
    }

    fn step(&self, x: Vec2) -> Option<Bounce> {
        let p = self.decode(x)?;
        billiard_map(&self.table, p).ok()?.hit()
    }

    /// Displacement between encoded points, taking the shorter way around a
    /// component.
    pub fn displacement(&self, from: Vec2, to: Vec2) -> Vec2 {
        let mut d = to - from;
        if let (Some(a), Some(b)) = (self.decode(from), self.decode(to)) {
            if a.component == b.component {
                let len = self.table.component_length(a.component).unwrap_or(f64::INFINITY);
                d[0] -= len * (d[0] / len).round();
            }
        }
        d
    }

    pub fn planar_map(&self) -> PlanarMap {
        let (f, j, i, d) = (self.clone(), self.clone(), self.clone(), self.clone());
        PlanarMap::partial(move |x| f.step(x).map(|b| f.encode(b.to)))
            .with_partial_jacobian(move |x| j.step(x).map(|b| differential_of(&b)))
            .with_partial_inverse(move |y| {
                let b = i.step(Vec2::new(y[0], -y[1]))?;
                Some(i.encode(b.to.reversed()))
            })
            .with_displacement(move |a, b| d.displacement(a, b))
    }
}
