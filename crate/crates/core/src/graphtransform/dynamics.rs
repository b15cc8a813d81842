use crate::graphtransform::{NormalizedMap, Which};
use crate::{Direction, Error, Result, Vec2};

/// Outcome of following an orbit inside the ball `|x|_inf <= sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipBound {
    /// Largest `l` with all of the first `l` iterates inside the ball.
    pub steps_inside: usize,
    /// Bound on the distance to the manifold implied by `steps_inside`;
    /// infinite when the starting point is outside the ball.
    pub bound: f64,
    /// First iterate found outside the ball.
    pub exit_index: Option<usize>,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("radius must lie in (0, 1], got {sigma}")))
    }
}

fn step(nm: &NormalizedMap, x: Vec2, direction: Direction) -> Result<Vec2> {
    match direction {
        Direction::Forward => nm.forward(x),
        Direction::Backward => nm.inverse(x),
    }
}

/// Number of consecutive iterates of `w` (normalized coordinates) in the
/// ball, up to `n`, and the first index outside it.
fn steps_in_ball(
    nm: &NormalizedMap,
    w: Vec2,
    n: usize,
    sigma: f64,
    direction: Direction,
) -> Result<(usize, Option<usize>)> {
    if w.amax() > sigma {
        return Ok((0, Some(0)));
    }
    let mut x = w;
    for l in 1..=n {
        x = step(nm, x, direction)?;
        if x.amax() > sigma {
            return Ok((l - 1, Some(l)));
        }
    }
    Ok((n, None))
}

/// Follow `w` backward (unstable) or forward (stable) for up to `n` steps
/// and report the implied distance bound `lambda_t^l * 2 sigma`
/// (resp. `mu_t^-l * 2 sigma`).
pub fn membership_test(
    nm: &NormalizedMap,
    which: Which,
    w: Vec2,
    n: usize,
    sigma: f64,
) -> Result<MembershipBound> {
    check_sigma(sigma)?;
    let (direction, rate) = match which {
        Which::Unstable => (Direction::Backward, nm.params().lambda_t),
        Which::Stable => (Direction::Forward, 1.0 / nm.params().mu_t),
    };
    let (steps, exit) = steps_in_ball(nm, w, n, sigma, direction)?;
    let bound = if exit == Some(0) {
        f64::INFINITY
    } else {
        rate.powi(steps as i32) * 2.0 * sigma
    };
    Ok(MembershipBound {
        steps_inside: steps,
        bound,
        exit_index: exit,
    })
}

/// If `n` backward and `r` forward iterates of `w` stay in the ball of
/// radius `sigma`, then `|w| <= (lambda_t^n + mu_t^-r) 8 sigma`. Returns the
/// bound after checking both the hypotheses and the conclusion.
pub fn convexity_bound(nm: &NormalizedMap, w: Vec2, n: usize, r: usize, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    for (direction, count) in [(Direction::Backward, n), (Direction::Forward, r)] {
        if let (_, Some(index)) = steps_in_ball(nm, w, count, sigma, direction)? {
            return Err(Error::TrajectoryExit { direction, index });
        }
    }
    let p = nm.params();
    let bound = (p.lambda_t.powi(n as i32) + p.mu_t.powi(-(r as i32))) * 8.0 * sigma;
    let norm = w.norm();
    if norm > bound {
        return Err(Error::BoundViolated { norm, bound });
    }
    Ok(bound)
}
