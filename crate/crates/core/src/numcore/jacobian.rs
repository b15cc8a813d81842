use crate::{Error, Mat2, Result, Vec2};

/// Central-difference Jacobian of a planar map at `x`.
pub fn fd_jacobian(map: impl Fn(Vec2) -> Vec2, x: Vec2, h: f64) -> Result<Mat2> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    let mut jac = Mat2::zeros();
    for k in 0..2 {
        let mut dx = Vec2::zeros();
        dx[k] = h;
        let col = (map(x + dx) - map(x - dx)) / (2.0 * h);
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfDomain(format!(
                "map not finite near ({}, {})",
                x[0], x[1]
            )));
        }
        jac.set_column(k, &col);
    }
    Ok(jac)
}
