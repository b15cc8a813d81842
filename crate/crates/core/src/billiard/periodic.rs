use crate::billiard::dynamics::billiard_map;
use crate::billiard::table::{BilliardTable, PhasePoint, TableKind};
use crate::{Error, Result, Vec2};

const NEWTON_MAX_ITER: usize = 60;
const GRADIENT_TOL: f64 = 1e-13;
const HESSIAN_STEP: f64 = 1e-6;

/// Periodic orbit visiting the exterior disks in the cyclic order `word`.
///
/// Periodic orbits are the critical points of the total chord length, so
/// the parameters are found by Newton's method on its gradient. The result
/// is checked against the billiard map.
pub fn periodic_orbit(table: &BilliardTable, word: &[usize]) -> Result<Vec<PhasePoint>> {
    if table.kind() != TableKind::ExteriorDisks {
        return Err(Error::NotApplicable("periodic words need exterior disks".into()));
    }
    let p = word.len();
    if p < 2 {
        return Err(Error::InvalidArgument("a periodic word needs at least two letters".into()));
    }
    for i in 0..p {
        table.disk(word[i])?;
        if word[i] == word[(i + 1) % p] {
            return Err(Error::InvalidArgument(format!(
                "word repeats disk {} at position {i}",
                word[i]
            )));
        }
    }

    let mut theta = (0..p)
        .map(|i| {
            let c = table.disk(word[i])?.center;
            let prev = table.disk(word[(i + p - 1) % p])?.center;
            let next = table.disk(word[(i + 1) % p])?.center;
            let r = table.disk(word[i])?.radius;
            let aim = 0.5 * (prev + next) - c;
            let aim = if aim.norm() > 1e-12 { aim.normalize() } else { (next - c).normalize() };
            table.theta_of(word[i], c + r * aim)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut converged = false;
    let mut grad = length_gradient(table, word, &theta)?;
    for _ in 0..NEWTON_MAX_ITER {
        if grad.iter().all(|g| g.abs() <= GRADIENT_TOL) {
            converged = true;
            break;
        }
        let hess = hessian(table, word, &theta)?;
        let step = hess
            .lu()
            .solve(&nalgebra::DVector::from_vec(grad.clone()))
            .ok_or_else(|| Error::Undefined("singular length Hessian".into()))?;
        for (t, s) in theta.iter_mut().zip(step.iter()) {
            *t -= s;
        }
        grad = length_gradient(table, word, &theta)?;
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: NEWTON_MAX_ITER,
            distance: grad.iter().fold(0.0, |m: f64, g| m.max(g.abs())),
        });
    }

    let mut orbit = Vec::with_capacity(p);
    for i in 0..p {
        let a = table.boundary_data(word[i], theta[i])?;
        let b = table.boundary_data(word[(i + 1) % p], theta[(i + 1) % p])?;
        let u = (b.x - a.x).normalize();
        orbit.push(PhasePoint::new(
            word[i],
            table.reduce_theta(word[i], theta[i])?,
            u.dot(&a.v),
        ));
    }
    for i in 0..p {
        let next = orbit[(i + 1) % p];
        let hit = billiard_map(table, orbit[i])?.hit();
        let ok = hit.is_some_and(|b| {
            b.to.component == next.component
                && table.reduce_theta(next.component, b.to.theta - next.theta).map_or(false, |d| d.abs() < 1e-9)
                && (b.to.sigma - next.sigma).abs() < 1e-9
        });
        if !ok {
            return Err(Error::Undefined(format!("word {word:?} has no realizable orbit")));
        }
    }
    Ok(orbit)
}

fn points(table: &BilliardTable, word: &[usize], theta: &[f64]) -> Result<Vec<(Vec2, Vec2)>> {
    word.iter()
        .zip(theta)
        .map(|(&c, &t)| table.boundary_data(c, t).map(|b| (b.x, b.v)))
        .collect()
}

/// Gradient of the total length; component `i` is the mismatch between
/// the incoming and outgoing tangential momenta at bounce `i`.
fn length_gradient(table: &BilliardTable, word: &[usize], theta: &[f64]) -> Result<Vec<f64>> {
    let pts = points(table, word, theta)?;
    let p = pts.len();
    Ok((0..p)
        .map(|i| {
            let (x, v) = pts[i];
            let out = (pts[(i + 1) % p].0 - x).normalize();
            let inc = (x - pts[(i + p - 1) % p].0).normalize();
            inc.dot(&v) - out.dot(&v)
        })
        .collect())
}

fn hessian(table: &BilliardTable, word: &[usize], theta: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
    let p = theta.len();
    let mut h = nalgebra::DMatrix::zeros(p, p);
    let mut t = theta.to_vec();
    for j in 0..p {
        t[j] = theta[j] + HESSIAN_STEP;
        let plus = length_gradient(table, word, &t)?;
        t[j] = theta[j] - HESSIAN_STEP;
        let minus = length_gradient(table, word, &t)?;
        t[j] = theta[j];
        for i in 0..p {
            h[(i, j)] = (plus[i] - minus[i]) / (2.0 * HESSIAN_STEP);
        }
    }
    Ok(h)
}

/// Primitive cyclic words over `n` letters of each length in
/// `2..=max_len` without repeated neighbours, one per rotation class.
pub fn cyclic_words(n: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for len in 2..=max_len {
        let mut word = vec![0usize; len];
        loop {
            if is_canonical(&word, n) {
                out.push(word.clone());
            }
            // odometer increment
            let mut k = len;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                word[k] += 1;
                if word[k] < n {
                    break;
                }
                word[k] = 0;
                if k == 0 {
                    k = usize::MAX;
                    break;
                }
            }
            if k == usize::MAX {
                break;
            }
        }
    }
    out
}

fn is_canonical(word: &[usize], n: usize) -> bool {
    let p = word.len();
    if word.iter().any(|&c| c >= n) || (0..p).any(|i| word[i] == word[(i + 1) % p]) {
        return false;
    }
    for shift in 1..p {
        let rotated = (0..p).map(|i| word[(i + shift) % p]);
        match rotated.cmp(word.iter().copied()) {
            std::cmp::Ordering::Less => return false,
            // equal to a proper rotation: not primitive
            std::cmp::Ordering::Equal => return false,
            std::cmp::Ordering::Greater => {}
        }
    }
    true
}

/// Phase points of all periodic orbits with words up to `max_len`; every
/// such point lies in the trapped set exactly.
pub fn periodic_samples(table: &BilliardTable, max_len: usize) -> Result<Vec<PhasePoint>> {
    let mut out = Vec::new();
    for word in cyclic_words(table.disks().len(), max_len) {
        out.extend(periodic_orbit(table, &word)?);
    }
    Ok(out)
}
