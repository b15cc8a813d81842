use crate::graphtransform::{NormalizedMap, Which};
use crate::numcore::{invert_monotone, GridFunction};
use crate::{Error, Result, Vec2};

const INVERSION_TOL: f64 = 1e-13;

/// Unstable graph transform: the graph of the result is the image of the
/// graph of `f` under the map, cut to `|x1| <= 1`.
pub fn graph_transform_u(nm: &NormalizedMap, f: &GridFunction) -> Result<GridFunction> {
    transform(f, |p| nm.forward(p), false)
}

/// Stable graph transform: the same construction for the inverse map with
/// the coordinates exchanged, `f` being a graph over `x2`.
pub fn graph_transform_s(nm: &NormalizedMap, f: &GridFunction) -> Result<GridFunction> {
    transform(f, |p| nm.inverse(p), true)
}

pub fn graph_transform(nm: &NormalizedMap, which: Which, f: &GridFunction) -> Result<GridFunction> {
    match which {
        Which::Unstable => graph_transform_u(nm, f),
        Which::Stable => graph_transform_s(nm, f),
    }
}

fn embed(f: &GridFunction, x: f64, swap: bool) -> Result<Vec2> {
    let v = f.eval(x)?;
    Ok(if swap { Vec2::new(v, x) } else { Vec2::new(x, v) })
}

/// `(G1(x), G2(x))`: the expanding and the transverse coordinate of the
/// image of the graph point over `x`.
fn graph_image(
    f: &GridFunction,
    h: &impl Fn(Vec2) -> Result<Vec2>,
    x: f64,
    swap: bool,
) -> Result<(f64, f64)> {
    let p = h(embed(f, x, swap)?)?;
    Ok(if swap { (p[1], p[0]) } else { (p[0], p[1]) })
}

fn transform(
    f: &GridFunction,
    h: impl Fn(Vec2) -> Result<Vec2>,
    swap: bool,
) -> Result<GridFunction> {
    let g1 = |x: f64| graph_image(f, &h, x, swap).map(|v| v.0).unwrap_or(f64::NAN);
    let mut values = Vec::with_capacity(f.len());
    for &y in f.nodes() {
        let x = invert_monotone(g1, y, (-1.0, 1.0), INVERSION_TOL).map_err(|e| match e {
            Error::NotMonotone => {
                Error::DeltaTooLarge("graph map is not monotone on [-1, 1]".into())
            }
            Error::NoRoot { target, lo, hi } => Error::DeltaTooLarge(format!(
                "image [{lo}, {hi}] of the graph does not cover {target}"
            )),
            other => other,
        })?;
        values.push(graph_image(f, &h, x, swap)?.1);
    }
    GridFunction::from_values(f.grid().clone(), values)
}

/// `sup |F_out(G1(x)) - G2(x)|` over the nodes whose image stays in the
/// unit interval, `G` built from `f_in`.
pub fn invariance_residual(
    nm: &NormalizedMap,
    which: Which,
    f_in: &GridFunction,
    f_out: &GridFunction,
) -> Result<f64> {
    let swap = which == Which::Stable;
    let h = |p: Vec2| match which {
        Which::Unstable => nm.forward(p),
        Which::Stable => nm.inverse(p),
    };
    let mut worst: f64 = 0.0;
    for &x in f_in.nodes() {
        let (g1, g2) = graph_image(f_in, &h, x, swap)?;
        if g1.abs() <= 1.0 {
            worst = worst.max((f_out.eval(g1)? - g2).abs());
        }
    }
    Ok(worst)
}

/// `d_N(Phi f, Phi g) / d_N(f, g)` with `d_N` the grid `C^N` seminorm of the
/// difference, `N = params.n_reg`.
pub fn contraction_ratio(
    nm: &NormalizedMap,
    which: Which,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<f64> {
    let n = nm.params().n_reg;
    let before = f.sub(g)?.ck_seminorm(n)?;
    if before <= f64::MIN_POSITIVE {
        return Err(Error::UndefinedRatio);
    }
    let tf = graph_transform(nm, which, f)?;
    let tg = graph_transform(nm, which, g)?;
    Ok(tf.sub(&tg)?.ck_seminorm(n)? / before)
}

/// `(||f||_{C^N}, Lipschitz quotient of f^(N))`, both expected to be <= 1
/// for admissible graphs.
pub fn admissibility(f: &GridFunction, n_reg: usize) -> Result<(f64, f64)> {
    Ok((f.ck_seminorm(n_reg)?, f.lipschitz_of_derivative(n_reg)?))
}
