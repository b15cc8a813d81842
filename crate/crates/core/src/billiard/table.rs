use std::f64::consts::PI;

use crate::{Error, Result, Vec2};

/// Boundary points with `|sigma| >= 1 - GLANCING_EPS` count as glancing.
pub const GLANCING_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    /// The inside of a single disk; theta runs counterclockwise.
    InteriorDisk,
    /// The complement of disjoint disks; theta runs clockwise on each.
    ExteriorDisks,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Self { center, radius }
    }
}

/// Unit-speed boundary frame at a point: position, tangent `v`, inward
/// normal `n` and signed curvature `k` with `dv/dtheta = k n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: Vec2,
    pub v: Vec2,
    pub n: Vec2,
    pub k: f64,
}

/// `(component, theta, sigma)` with theta the arc length on the component
/// and sigma the tangential component of the outgoing unit velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub component: usize,
    pub theta: f64,
    pub sigma: f64,
}

impl PhasePoint {
    pub fn new(component: usize, theta: f64, sigma: f64) -> Self {
        Self {
            component,
            theta,
            sigma,
        }
    }

    /// Time reversal `(theta, sigma) -> (theta, -sigma)`.
    pub fn reversed(self) -> Self {
        Self {
            sigma: -self.sigma,
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilliardTable {
    kind: TableKind,
    disks: Vec<Disk>,
}

impl BilliardTable {
    pub fn interior_disk(center: Vec2, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self {
            kind: TableKind::InteriorDisk,
            disks: vec![Disk::new(center, radius)],
        })
    }

    pub fn unit_disk() -> Self {
        Self::interior_disk(Vec2::zeros(), 1.0).expect("unit disk")
    }

    pub fn exterior_disks(disks: Vec<Disk>) -> Result<Self> {
        if disks.is_empty() {
            return Err(Error::InvalidArgument("a table needs at least one disk".into()));
        }
        for d in &disks {
            check_radius(d.radius)?;
        }
        for i in 0..disks.len() {
            for j in (i + 1)..disks.len() {
                let gap = (disks[i].center - disks[j].center).norm()
                    - disks[i].radius
                    - disks[j].radius;
                if gap <= 0.0 {
                    return Err(Error::InvalidArgument(format!("disks {i} and {j} overlap")));
                }
            }
        }
        Ok(Self {
            kind: TableKind::ExteriorDisks,
            disks,
        })
    }

    /// Three disks of equal radius centred on an equilateral triangle with
    /// centroid at the origin; disk 0 is the bottom one.
    pub fn three_disks(radius: f64, side: f64) -> Result<Self> {
        let rc = side / 3f64.sqrt();
        let centers = [
            Vec2::new(0.0, -rc),
            Vec2::new(0.5 * side, 0.5 * rc),
            Vec2::new(-0.5 * side, 0.5 * rc),
        ];
        Self::exterior_disks(centers.iter().map(|&c| Disk::new(c, radius)).collect())
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn disk(&self, component: usize) -> Result<&Disk> {
        self.disks
            .get(component)
            .ok_or(Error::UnknownComponent(component))
    }

    pub fn component_length(&self, component: usize) -> Result<f64> {
        Ok(2.0 * PI * self.disk(component)?.radius)
    }

    pub fn curvature(&self, component: usize) -> Result<f64> {
        let r = self.disk(component)?.radius;
        Ok(match self.kind {
            TableKind::InteriorDisk => 1.0 / r,
            TableKind::ExteriorDisks => -1.0 / r,
        })
    }

    pub fn boundary_data(&self, component: usize, theta: f64) -> Result<BoundaryPoint> {
        let d = self.disk(component)?;
        let r = d.radius;
        let (s, c) = (theta / r).sin_cos();
        Ok(match self.kind {
            TableKind::InteriorDisk => BoundaryPoint {
                x: d.center + r * Vec2::new(c, s),
                v: Vec2::new(-s, c),
                n: Vec2::new(-c, -s),
                k: 1.0 / r,
            },
            TableKind::ExteriorDisks => BoundaryPoint {
                x: d.center + r * Vec2::new(c, -s),
                v: Vec2::new(-s, -c),
                n: Vec2::new(c, -s),
                k: -1.0 / r,
            },
        })
    }

    /// Arc-length parameter of a point on (or radially projected to) a
    /// component, in `[-L/2, L/2)`.
    pub fn theta_of(&self, component: usize, x: Vec2) -> Result<f64> {
        let d = self.disk(component)?;
        let u = x - d.center;
        let phi = match self.kind {
            TableKind::InteriorDisk => u[1].atan2(u[0]),
            TableKind::ExteriorDisks => (-u[1]).atan2(u[0]),
        };
        self.reduce_theta(component, d.radius * phi)
    }

    /// Representative of `theta` in `[-L/2, L/2)`.
    pub fn reduce_theta(&self, component: usize, theta: f64) -> Result<f64> {
        let len = self.component_length(component)?;
        let t = theta - len * ((theta + 0.5 * len) / len).floor();
        Ok(if t >= 0.5 * len { t - len } else { t })
    }

    /// Chord length `|x(theta1) - x(theta2)|`.
    pub fn generating_function(
        &self,
        c1: usize,
        theta1: f64,
        c2: usize,
        theta2: f64,
    ) -> Result<f64> {
        let a = self.boundary_data(c1, theta1)?.x;
        let b = self.boundary_data(c2, theta2)?.x;
        let l = (a - b).norm();
        if l <= 1e-14 {
            return Err(Error::Undefined("generating function at coincident points".into()));
        }
        Ok(l)
    }

    /// Parameter of the point on `from` facing the centre of `to`.
    pub fn facing_theta(&self, from: usize, to: usize) -> Result<f64> {
        let a = self.disk(from)?;
        let b = self.disk(to)?;
        let u = (b.center - a.center).normalize();
        self.theta_of(from, a.center + a.radius * u)
    }

    /// Period-2 orbit bouncing along the line of centres of two exterior disks.
    pub fn period2_orbit(&self, i: usize, j: usize) -> Result<[PhasePoint; 2]> {
        if self.kind != TableKind::ExteriorDisks || i == j {
            return Err(Error::NotApplicable("period-2 orbits need two exterior disks".into()));
        }
        Ok([
            PhasePoint::new(i, self.facing_theta(i, j)?, 0.0),
            PhasePoint::new(j, self.facing_theta(j, i)?, 0.0),
        ])
    }

    /// Parameter on `component` of the point facing the centroid of all
    /// disk centres.
    pub fn theta_facing_centroid(&self, component: usize) -> Result<f64> {
        let d = self.disk(component)?;
        let centroid =
            self.disks.iter().fold(Vec2::zeros(), |acc, d| acc + d.center) / self.disks.len() as f64;
        let u = centroid - d.center;
        if u.norm() < 1e-14 {
            return Ok(0.0);
        }
        self.theta_of(component, d.center + d.radius * u.normalize())
    }

    /// No disk meets the convex hull of any two others.
    pub fn no_eclipse_check(&self) -> Result<bool> {
        if self.kind != TableKind::ExteriorDisks || self.disks.len() < 3 {
            return Err(Error::NotApplicable(
                "the no-eclipse condition needs at least three exterior disks".into(),
            ));
        }
        let n = self.disks.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let gap = hull_gap(&self.disks[i], &self.disks[j], self.disks[k].center);
                    if gap <= self.disks[k].radius {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("disk radius must be > 0, got {r}")))
    }
}

/// Distance from `p` to the convex hull of two disks. The hull is the union
/// of the disks with centre and radius interpolated linearly, and
/// `t -> |p - c(t)| - r(t)` is convex, so a golden-section search finds the
/// minimum.
fn hull_gap(a: &Disk, b: &Disk, p: Vec2) -> f64 {
    let f = |t: f64| {
        let c = a.center + t * (b.center - a.center);
        let r = a.radius + t * (b.radius - a.radius);
        (p - c).norm() - r
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    f(0.0).min(f(1.0)).min(f(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames() {
        let t = BilliardTable::unit_disk();
        let b = t.boundary_data(0, 0.0).unwrap();
        assert_eq!(b.x, Vec2::new(1.0, 0.0));
        assert!((b.v.norm() - 1.0).abs() < 1e-15);
        assert_eq!(b.v.dot(&b.n), 0.0);
        assert_eq!(b.k, 1.0);

        let ext = BilliardTable::exterior_disks(vec![Disk::new(Vec2::zeros(), 2.0)]).unwrap();
        assert_eq!(ext.curvature(0).unwrap(), -0.5);
        // inward normal of the domain points away from the obstacle
        let b = ext.boundary_data(0, 0.7).unwrap();
        assert!(b.n.dot(&b.x) > 0.0);
    }

    #[test]
    fn curvature_identity_by_finite_differences() {
        let h = 1e-5;
        for table in [
            BilliardTable::unit_disk(),
            BilliardTable::interior_disk(Vec2::new(1.0, 2.0), 0.7).unwrap(),
            BilliardTable::three_disks(1.3, 6.0).unwrap(),
        ] {
            for &theta in &[-2.0, -0.3, 0.0, 0.9, 2.5] {
                let p = table.boundary_data(0, theta).unwrap();
                let fwd = table.boundary_data(0, theta + h).unwrap();
                let bwd = table.boundary_data(0, theta - h).unwrap();
                let dv = (fwd.v - bwd.v) / (2.0 * h);
                let dx = (fwd.x - bwd.x) / (2.0 * h);
                assert!((dv - p.k * p.n).norm() < 1e-8);
                assert!((dx - p.v).norm() < 1e-8);
                // (v, n) positively oriented
                assert!((p.v[0] * p.n[1] - p.v[1] * p.n[0] - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn theta_round_trip() {
        let t = BilliardTable::three_disks(1.0, 6.0).unwrap();
        for c in 0..3 {
            for &theta in &[-3.0, -1.0, 0.0, 2.0, 3.1] {
                let x = t.boundary_data(c, theta).unwrap().x;
                assert!((t.theta_of(c, x).unwrap() - theta).abs() < 1e-12);
            }
        }
        assert!((t.reduce_theta(0, 7.0).unwrap() - (7.0 - 2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn chords() {
        let t = BilliardTable::unit_disk();
        assert!((t.generating_function(0, 0.3, 0, 0.3 + PI).unwrap() - 2.0).abs() < 1e-15);
        for &(a, b) in &[(0.0, 1.0), (-2.0, 0.5), (1.0, 3.0)] {
            let l = t.generating_function(0, a, 0, b).unwrap();
            assert!((l - 2.0 * (0.5f64 * (b - a)).abs().sin()).abs() < 1e-14);
        }
        assert!(t.generating_function(0, 1.0, 0, 1.0).is_err());
    }

    #[test]
    fn no_eclipse() {
        assert!(BilliardTable::three_disks(1.0, 6.0).unwrap().no_eclipse_check().unwrap());
        assert!(!BilliardTable::three_disks(1.0, 2.001).unwrap().no_eclipse_check().unwrap());
        let two = BilliardTable::exterior_disks(vec![
            Disk::new(Vec2::zeros(), 1.0),
            Disk::new(Vec2::new(4.0, 0.0), 1.0),
        ])
        .unwrap();
        assert!(matches!(two.no_eclipse_check(), Err(Error::NotApplicable(_))));
        // a small disk right between two large ones is eclipsed
        let line = BilliardTable::exterior_disks(vec![
            Disk::new(Vec2::new(-5.0, 0.0), 1.0),
            Disk::new(Vec2::new(5.0, 0.0), 1.0),
            Disk::new(Vec2::new(0.0, 0.9), 0.2),
        ])
        .unwrap();
        assert!(!line.no_eclipse_check().unwrap());
    }

    #[test]
    fn invalid_tables() {
        assert!(BilliardTable::interior_disk(Vec2::zeros(), 0.0).is_err());
        assert!(BilliardTable::exterior_disks(vec![
            Disk::new(Vec2::zeros(), 1.0),
            Disk::new(Vec2::new(1.5, 0.0), 1.0)
        ])
        .is_err());
        assert_eq!(
            BilliardTable::unit_disk().boundary_data(3, 0.0),
            Err(Error::UnknownComponent(3))
        );
    }
}
