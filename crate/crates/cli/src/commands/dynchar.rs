use std::path::Path;

use hypman_core::graphtransform::{compute_manifold, NormalizedMap, Which, DEFAULT_MAX_ITER, DEFAULT_TOL};
use hypman_core::Vec2;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{num, write_csv, write_pgm};
use crate::CliError;

/// Number of backward iterates of `w` that stay in the closed ball, up to `n`.
fn survival(nm: &NormalizedMap, w: Vec2, n: usize, sigma: f64) -> usize {
    let mut x = w;
    for l in 1..=n {
        match nm.inverse(x) {
            Ok(y) if y.amax() <= sigma => x = y,
            _ => return l - 1,
        }
    }
    n
}

/// Frames `{w : phi^{-l}(w) in the ball for l <= n}` for `n = 0..=n_max`
/// in normalized coordinates, with the distance of each frame to `W_u`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let dc = cfg.dynchar.clone().unwrap_or_default();
    dc.validate()?;
    let echo = cfg.echo();
    let map = dc.map.build()?;
    let nm = super::normalize(&map, dc.delta_target, hypman_core::graphtransform::DEFAULT_REGULARITY)?;
    let wu = compute_manifold(&nm, Which::Unstable, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let res = dc.resolution;
    let sigma = dc.sigma;
    let centre = |k: usize| sigma * (-1.0 + (2 * k + 1) as f64 / res as f64);
    // row 0 is the top of the image (largest x2)
    let counts: Vec<Vec<usize>> = (0..res)
        .into_par_iter()
        .map(|row| {
            let x2 = centre(res - 1 - row);
            (0..res).map(|col| survival(&nm, Vec2::new(centre(col), x2), dc.n_max, sigma)).collect()
        })
        .collect();
    let lambda_t = nm.params().lambda_t;
    let mut rows = Vec::new();
    for n in 0..=dc.n_max {
        let frame: Vec<Vec<u8>> = counts
            .iter()
            .map(|r| r.iter().map(|&c| if c >= n { 255 } else { 0 }).collect())
            .collect();
        write_pgm(&out.join(format!("dynchar_{n:02}.pgm")), &echo, res, &frame)?;
        let mut lit = 0usize;
        let mut dist: f64 = 0.0;
        for (row, r) in counts.iter().enumerate() {
            for (col, &c) in r.iter().enumerate() {
                if c >= n {
                    lit += 1;
                    let w = Vec2::new(centre(col), centre(res - 1 - row));
                    dist = dist.max(wu.distance_normalized(w)?);
                }
            }
        }
        rows.push(vec![
            n.to_string(),
            num(lit as f64 / (res * res) as f64),
            num(dist),
            num(lambda_t.powi(n as i32) * 2.0 * sigma),
        ]);
    }
    write_csv(&out.join("dynchar.csv"), &echo, &["n", "fraction", "max_distance_to_wu", "bound"], &rows)?;
    println!("wrote {} frames of {res}x{res}", dc.n_max + 1);
    Ok(())
}
