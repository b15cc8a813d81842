use rayon::prelude::*;

use crate::graphtransform::PlanarMap;
use crate::{Error, Mat2, Result, Vec2};

const CONE_TOL: f64 = 1e-12;

/// Cones given by the sign of `v_0 v_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignCone {
    /// `v_0 v_1 >= 0`
    NonNegative,
    /// `v_0 v_1 <= 0`
    NonPositive,
}

impl SignCone {
    pub fn contains(self, v: Vec2) -> bool {
        let p = v[0] * v[1];
        let slack = CONE_TOL * v.norm_squared();
        match self {
            SignCone::NonNegative => p >= -slack,
            SignCone::NonPositive => p <= slack,
        }
    }

    /// Eight unit vectors spanning the cone from one boundary ray to the
    /// other; the opposite half follows by linearity.
    pub fn test_vectors(self) -> [Vec2; 8] {
        let sign = match self {
            SignCone::NonNegative => 1.0,
            SignCone::NonPositive => -1.0,
        };
        std::array::from_fn(|k| {
            let a = std::f64::consts::FRAC_PI_2 * k as f64 / 7.0;
            Vec2::new(a.cos(), sign * a.sin())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSample {
    pub point: Vec2,
    pub invariance_ok: bool,
    /// Smallest and largest growth of unstable-cone vectors under `d phi`.
    pub factor_u: f64,
    pub max_factor_u: f64,
    /// Smallest growth of stable-cone vectors under `d phi^{-1}`.
    pub factor_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeCertificate {
    pub samples: Vec<ConeSample>,
    /// Smallest expansion factor over all samples and both cones.
    pub lambda_measured: f64,
}

impl ConeCertificate {
    pub fn valid(&self) -> bool {
        !self.samples.is_empty()
            && self.samples.iter().all(|s| s.invariance_ok)
            && self.lambda_measured > 1.0
    }

    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| !s.invariance_ok).count()
    }
}

/// Check `d phi(x) C_u ⊂ C_u` and `d phi(x)^{-1} C_s ⊂ C_s` at each sample,
/// recording the growth `|d phi v|_{phi(x)} / |v|_x` on `C_u` and
/// `|d phi^{-1} v|_{phi^{-1}(x)} / |v|_x` on `C_s`. `norm(x, v)` is the
/// norm of the tangent vector `v` at `x`. Samples where the map or its
/// inverse is undefined are recorded as failures.
pub fn cone_certify(
    map: &PlanarMap,
    samples: &[Vec2],
    cone_u: SignCone,
    cone_s: SignCone,
    norm: impl Fn(Vec2, Vec2) -> f64 + Sync,
) -> ConeCertificate {
    let samples: Vec<ConeSample> = samples
        .par_iter()
        .map(|&x| certify_one(map, x, cone_u, cone_s, &norm))
        .collect();
    let lambda_measured = samples
        .iter()
        .map(|s| s.factor_u.min(s.factor_s))
        .fold(f64::INFINITY, f64::min);
    ConeCertificate {
        samples,
        lambda_measured: if lambda_measured.is_finite() { lambda_measured } else { 0.0 },
    }
}

fn certify_one(
    map: &PlanarMap,
    x: Vec2,
    cone_u: SignCone,
    cone_s: SignCone,
    norm: &impl Fn(Vec2, Vec2) -> f64,
) -> ConeSample {
    let failed = ConeSample {
        point: x,
        invariance_ok: false,
        factor_u: 0.0,
        max_factor_u: 0.0,
        factor_s: 0.0,
    };
    let forward = (|| {
        let y = map.forward(x).ok()?;
        Some((y, map.jacobian(x).ok()?))
    })();
    let backward = (|| {
        let w = map.inverse(x, None).ok()?;
        Some((w, map.jacobian(w).ok()?.try_inverse()?))
    })();
    let (Some((y, j)), Some((w, jinv))) = (forward, backward) else {
        return failed;
    };
    let mut ok = true;
    let mut fu = f64::INFINITY;
    let mut fu_max: f64 = 0.0;
    for v in cone_u.test_vectors() {
        let image = j * v;
        ok &= cone_u.contains(image);
        let f = norm(y, image) / norm(x, v);
        fu = fu.min(f);
        fu_max = fu_max.max(f);
    }
    let mut fs = f64::INFINITY;
    for v in cone_s.test_vectors() {
        let image = jinv * v;
        ok &= cone_s.contains(image);
        fs = fs.min(norm(w, image) / norm(x, v));
    }
    ConeSample {
        point: x,
        invariance_ok: ok,
        factor_u: fu,
        max_factor_u: fu_max,
        factor_s: fs,
    }
}

/// Most contracted direction of `d phi^n(x)`, an approximation of `E_s(x)`
/// with error of order `(lambda / mu)^n`.
pub fn stable_direction(map: &PlanarMap, x: Vec2, n: usize) -> Result<Vec2> {
    let mut y = x;
    let mut d = Mat2::identity();
    for _ in 0..n {
        let j = map.jacobian(y)?;
        d = j * d;
        // keep the product bounded; only its singular directions matter
        d /= d.amax();
        y = map.forward(y)?;
    }
    least_stretched(d)
}

/// Most contracted direction of `d phi^{-n}(x)`, approximating `E_u(x)`.
pub fn unstable_direction(map: &PlanarMap, x: Vec2, n: usize) -> Result<Vec2> {
    let mut y = x;
    let mut d = Mat2::identity();
    for _ in 0..n {
        let w = map.inverse(y, None)?;
        let jinv = map
            .jacobian(w)?
            .try_inverse()
            .ok_or_else(|| Error::Undefined("singular differential".into()))?;
        d = jinv * d;
        d /= d.amax();
        y = w;
    }
    least_stretched(d)
}

fn least_stretched(d: Mat2) -> Result<Vec2> {
    // eigenvector of d^T d for the smaller eigenvalue
    let g = d.transpose() * d;
    let eig = g.symmetric_eigen();
    let k = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    let v: Vec2 = eig.eigenvectors.column(k).into();
    if !v.iter().all(|c| c.is_finite()) {
        return Err(Error::Undefined("direction is not finite".into()));
    }
    Ok(if v[0].abs() >= v[1].abs() { v * v[0].signum() } else { v * v[1].signum() })
}

/// Angle between two lines, in `[0, pi/2]`.
pub fn line_angle(a: Vec2, b: Vec2) -> f64 {
    let c = (a.dot(&b) / (a.norm() * b.norm())).abs().min(1.0);
    c.acos()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityPair {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub gap: f64,
}

/// Distance and stable-direction angle for nearest-neighbour pairs of
/// samples, closest pairs first, at most `pair_budget` of them. Samples whose
/// forward orbit cannot be followed for `n_iter` steps are skipped.
pub fn continuity_probe(
    map: &PlanarMap,
    samples: &[Vec2],
    n_iter: usize,
    pair_budget: usize,
) -> Result<Vec<ContinuityPair>> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("continuity probe needs at least two samples".into()));
    }
    let dirs: Vec<Option<Vec2>> = samples
        .par_iter()
        .map(|&x| stable_direction(map, x, n_iter).ok())
        .collect();
    let live: Vec<usize> = (0..samples.len()).filter(|&i| dirs[i].is_some()).collect();
    let mut pairs: Vec<ContinuityPair> = Vec::new();
    for &i in &live {
        let nearest = live
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| (j, map.displacement(samples[i], samples[j]).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((j, distance)) = nearest {
            let (a, b) = (i.min(j), i.max(j));
            if pairs.iter().any(|p| p.i == a && p.j == b) {
                continue;
            }
            let gap = line_angle(dirs[a].expect("live"), dirs[b].expect("live"));
            pairs.push(ContinuityPair {
                i: a,
                j: b,
                distance,
                gap,
            });
        }
    }
    pairs.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.i.cmp(&b.i)));
    pairs.truncate(pair_budget);
    Ok(pairs)
}

/// `(x, y) -> (2x + y + eps f(x), x + y + eps f(x)) mod 1` with
/// `f(x) = sin(2 pi x) / (2 pi)`, an area-preserving perturbation of the cat
/// map on the torus. `f` vanishes at `0` and `1/2`, so the origin stays
/// fixed and `(1/2, 1/2) -> (1/2, 0) -> (0, 1/2)` stays a 3-cycle.
pub fn perturbed_cat_map(eps: f64) -> PlanarMap {
    use std::f64::consts::TAU;
    let f = move |x: f64| eps * (TAU * x).sin() / TAU;
    let df = move |x: f64| eps * (TAU * x).cos();
    PlanarMap::new(move |p| {
        let g = f(p[0]);
        Vec2::new(
            (2.0 * p[0] + p[1] + g).rem_euclid(1.0),
            (p[0] + p[1] + g).rem_euclid(1.0),
        )
    })
    .with_jacobian(move |p| {
        let d = df(p[0]);
        Mat2::new(2.0 + d, 1.0, 1.0 + d, 1.0)
    })
    .with_inverse(move |q| {
        let x = (q[0] - q[1]).rem_euclid(1.0);
        Vec2::new(x, (q[1] - x - f(x)).rem_euclid(1.0))
    })
    .with_displacement(|a, b| {
        let d = b - a;
        Vec2::new(d[0] - d[0].round(), d[1] - d[1].round())
    })
}
