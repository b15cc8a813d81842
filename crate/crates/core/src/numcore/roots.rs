use crate::{Error, Result};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 60;

const MONOTONE_SAMPLES: usize = 17;
const BISECTION_MAX_ITER: usize = 200;

/// Solve `g(x) = y` for `x` in `bracket`, where `g` is strictly monotone.
///
/// Safeguarded Newton: a finite-difference Newton step is taken when it stays
/// inside the current sign-change bracket, bisection otherwise. Returns as
/// soon as `|g(x) - y| <= tol`.
pub fn invert_monotone(
    g: impl Fn(f64) -> f64,
    y: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<f64> {
    let (a, b) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    if !(a < b) || !y.is_finite() || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bad inversion request: bracket [{a}, {b}], y = {y}, tol = {tol}"
        )));
    }

    let samples: Vec<f64> = (0..MONOTONE_SAMPLES)
        .map(|i| g(a + (b - a) * i as f64 / (MONOTONE_SAMPLES - 1) as f64))
        .collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotMonotone);
    }
    let increasing = samples.windows(2).all(|w| w[1] > w[0]);
    let decreasing = samples.windows(2).all(|w| w[1] < w[0]);
    if !increasing && !decreasing {
        return Err(Error::NotMonotone);
    }

    let ga = samples[0];
    let gb = samples[MONOTONE_SAMPLES - 1];
    let (lo_val, hi_val) = if increasing { (ga, gb) } else { (gb, ga) };
    if y < lo_val - tol || y > hi_val + tol {
        return Err(Error::NoRoot {
            target: y,
            lo: lo_val,
            hi: hi_val,
        });
    }
    if (ga - y).abs() <= tol {
        return Ok(a);
    }
    if (gb - y).abs() <= tol {
        return Ok(b);
    }

    // residual r(x) = s * (g(x) - y) is increasing
    let s = if increasing { 1.0 } else { -1.0 };
    let mut lo = a;
    let mut hi = b;
    let mut x = a + (b - a) * (y - ga) / (gb - ga);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }

    for iter in 0..BISECTION_MAX_ITER {
        let r = g(x) - y;
        if r.abs() <= tol {
            return Ok(x);
        }
        if s * r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= f64::EPSILON * x.abs().max(1.0) {
            return Ok(x);
        }

        let mut next = 0.5 * (lo + hi);
        if iter < NEWTON_MAX_ITER {
            let h = 1e-7 * x.abs().max(1.0);
            let slope = (g(x + h) - g(x - h)) / (2.0 * h);
            if slope.is_finite() && slope != 0.0 {
                let newton = x - r / slope;
                if newton > lo && newton < hi {
                    next = newton;
                }
            }
        }
        x = next;
    }
    Ok(x)
}
