use crate::graphtransform::{ManifoldGraph, PlanarMap, Which};
use crate::hypmap::local::LocalManifolds;
use crate::{Error, Result, Vec2};

pub const REFINE_SPACING: f64 = 1e-2;
pub const MAX_POLYLINE_POINTS: usize = 1_000_000;
const INITIAL_SAMPLES: usize = 65;
const MIN_PARAMETER_GAP: f64 = 1e-13;

/// A vertex of a global manifold: graph parameter on the local manifold it
/// comes from, and its image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub s: f64,
    pub x: Vec2,
}

/// `W_u^(k)(x) = phi^k(W_u(phi^{-k} x))` or `W_s^(k)(x) = phi^{-k}(W_s(phi^k x))`
/// as polylines whose consecutive vertices are at most `REFINE_SPACING` apart.
/// The curve breaks into several pieces where the map is undefined.
#[derive(Debug, Clone)]
pub struct GlobalManifold {
    pub which: Which,
    pub k: usize,
    pub pieces: Vec<Vec<CurvePoint>>,
    pub truncated: bool,
    base: ManifoldGraph,
    map: PlanarMap,
}

fn step(map: &PlanarMap, which: Which, x: Vec2) -> Option<Vec2> {
    match which {
        Which::Unstable => map.try_forward(x),
        Which::Stable => map.inverse(x, None).ok(),
    }
}

fn curve(map: &PlanarMap, base: &ManifoldGraph, which: Which, k: usize, s: f64) -> Option<Vec2> {
    let mut x = base.point(s).ok()?;
    for _ in 0..k {
        x = step(map, which, x)?;
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Global manifold through orbit point `i` after `k` pushes of the local
/// manifold at `phi^{-k}(x_i)` (unstable) or `phi^k(x_i)` (stable).
pub fn global_manifold(
    map: &PlanarMap,
    local: &LocalManifolds,
    which: Which,
    i: usize,
    k: usize,
) -> Result<GlobalManifold> {
    let p = local.unstable.len();
    let j = match which {
        Which::Unstable => (i + p * (k / p + 1) - k % p) % p,
        Which::Stable => (i + k) % p,
    };
    let base = local.graph(which, j).clone();
    let mut out = GlobalManifold {
        which,
        k,
        pieces: Vec::new(),
        truncated: false,
        base,
        map: map.clone(),
    };
    out.refine()?;
    Ok(out)
}

impl GlobalManifold {
    pub fn eval(&self, s: f64) -> Option<Vec2> {
        curve(&self.map, &self.base, self.which, self.k, s)
    }

    fn refine(&mut self) -> Result<()> {
        // `None` marks a break where the curve is undefined
        let mut seq: Vec<Option<CurvePoint>> = Vec::new();
        let mut prev: Option<CurvePoint> = None;
        for i in 0..INITIAL_SAMPLES {
            let s = -1.0 + 2.0 * i as f64 / (INITIAL_SAMPLES - 1) as f64;
            let here = self.eval(s).map(|x| CurvePoint { s, x });
            if let (Some(a), Some(b)) = (prev, here) {
                self.subdivide(a, b, &mut seq)?;
            }
            seq.push(here);
            prev = here;
        }
        self.truncated = seq.iter().any(Option::is_none);
        self.pieces = seq
            .split(Option::is_none)
            .filter(|p| !p.is_empty())
            .map(|p| p.iter().flatten().copied().collect())
            .collect();
        Ok(())
    }

    /// Vertices strictly between `a` and `b` until neighbours are within
    /// `REFINE_SPACING`.
    fn subdivide(&self, a: CurvePoint, b: CurvePoint, out: &mut Vec<Option<CurvePoint>>) -> Result<()> {
        if self.map.displacement(a.x, b.x).norm() <= REFINE_SPACING || b.s - a.s <= MIN_PARAMETER_GAP {
            return Ok(());
        }
        if out.len() > MAX_POLYLINE_POINTS {
            return Err(Error::InvalidArgument(format!(
                "global manifold needs more than {MAX_POLYLINE_POINTS} vertices"
            )));
        }
        let s = 0.5 * (a.s + b.s);
        match self.eval(s) {
            Some(x) => {
                let mid = CurvePoint { s, x };
                self.subdivide(a, mid, out)?;
                out.push(Some(mid));
                self.subdivide(mid, b, out)
            }
            None => {
                out.push(None);
                Ok(())
            }
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = &CurvePoint> {
        self.pieces.iter().flatten()
    }

    pub fn vertex_count(&self) -> usize {
        self.pieces.iter().map(Vec::len).sum()
    }

    /// Total length of all pieces, measured with the map's displacement rule.
    pub fn length(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| p.windows(2))
            .map(|w| self.map.displacement(w[0].x, w[1].x).norm())
            .sum()
    }

    /// Distance from `y` to the curve: nearest polyline vertex pair, then a
    /// golden-section search on the curve parameter between the neighbours.
    pub fn distance_to(&self, y: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        let mut bracket = None;
        for piece in &self.pieces {
            for (idx, c) in piece.iter().enumerate() {
                let d = self.map.displacement(c.x, y).norm();
                if d < best {
                    best = d;
                    let lo = piece[idx.saturating_sub(1)].s;
                    let hi = piece[(idx + 1).min(piece.len() - 1)].s;
                    bracket = Some((lo, hi));
                }
            }
        }
        let Some((mut a, mut b)) = bracket else {
            return best;
        };
        let f = |s: f64| {
            self.eval(s)
                .map_or(f64::INFINITY, |x| self.map.displacement(x, y).norm())
        };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            if b - a <= 1e-15 * (1.0 + a.abs()) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        best.min(fc).min(fd)
    }
}

/// Largest distance from a vertex of `inner` to the curve `outer`.
pub fn nesting_defect(inner: &GlobalManifold, outer: &GlobalManifold) -> f64 {
    inner
        .vertices()
        .map(|c| outer.distance_to(c.x))
        .fold(0.0, f64::max)
}
