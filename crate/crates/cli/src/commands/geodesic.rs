use std::path::Path;

use hypman_core::geoflow::{
    estimate_stable_unstable, trajectory, verify_cones, ConeKind, ConeParams, IsothermalSurface,
};

use crate::config::{GeodesicConfig, GeodesicMode, RunConfig};
use crate::output::{num, write_csv};
use crate::CliError;

/// Grid used to sample curvature bounds when the config gives none.
const BOUND_SAMPLES: usize = 101;
/// Relative widening of sampled curvature bounds.
const BOUND_MARGIN: f64 = 0.01;

pub fn cone_params(gc: &GeodesicConfig, s: &IsothermalSurface) -> Result<ConeParams, CliError> {
    Ok(match (gc.k0, gc.k1) {
        (Some(k0), Some(k1)) => ConeParams::new(k0, k1)?,
        _ => {
            let (lo, hi) = s.curvature_range(BOUND_SAMPLES)?;
            ConeParams::new(-hi * (1.0 - BOUND_MARGIN), -lo * (1.0 + BOUND_MARGIN))?
        }
    })
}

pub fn run(cfg: &RunConfig, mode: Option<GeodesicMode>, out: &Path) -> Result<(), CliError> {
    let mut gc = cfg.geodesic.clone().unwrap_or_default();
    if let Some(m) = mode {
        gc.mode = m;
    }
    gc.validate()?;
    let echo = cfg.echo();
    let s = gc.surface.build()?;
    let st = gc.start_state();
    match gc.mode {
        GeodesicMode::Flow => {
            let traj = trajectory(&s, st, gc.t, gc.step)?;
            let rows: Vec<Vec<String>> = traj
                .iter()
                .map(|(t, p)| {
                    vec![num(*t), num(p.x), num(p.y), num(p.theta), num(s.curvature(p.x, p.y).unwrap_or(f64::NAN))]
                })
                .collect();
            write_csv(&out.join("geodesic_flow.csv"), &echo, &["t", "x", "y", "theta", "curvature"], &rows)?;
            let end = traj.last().map(|x| x.1).unwrap_or(st);
            println!("end state ({:.12}, {:.12}, {:.12})", end.x, end.y, end.theta);
        }
        GeodesicMode::Cones => {
            let p = cone_params(&gc, &s)?;
            let rep = verify_cones(&s, st, &p, gc.t_max, gc.n_dirs, gc.step)?;
            let rows: Vec<Vec<String>> = rep
                .directions
                .iter()
                .map(|d| {
                    vec![
                        match d.kind {
                            ConeKind::Unstable => "unstable".into(),
                            ConeKind::Stable => "stable".into(),
                        },
                        num(d.initial.a),
                        num(d.initial.b),
                        num(d.theta0),
                        num(d.theta_rate0),
                        num(d.theta_extreme),
                        num(d.min_growth),
                        num(d.final_growth),
                        d.passed().to_string(),
                    ]
                })
                .collect();
            write_csv(
                &out.join("cones.csv"),
                &echo,
                &["cone", "a0", "b0", "theta0", "theta_rate0", "theta_extreme", "min_growth", "final_growth", "passed"],
                &rows,
            )?;
            println!(
                "K0 = {:.6}, K1 = {:.6}, zeta = {:.6}, gamma = {:.6}, nu = {:.6}",
                p.k0, p.k1, p.zeta, p.gamma, p.nu
            );
            let failed = rep.directions.iter().filter(|d| !d.passed()).count();
            println!("{} directions, {failed} failed", rep.directions.len());
            if failed > 0 {
                return Err(CliError::Failed(format!("{failed} cone directions failed")));
            }
        }
        GeodesicMode::Directions => {
            let p = cone_params(&gc, &s)?;
            let mut rows = Vec::new();
            let mut last = None;
            for k in (0..4).rev() {
                let horizon = gc.horizon / f64::powi(2.0, k);
                let d = estimate_stable_unstable(&s, st, &p, horizon, gc.step)?;
                rows.push(vec![
                    num(horizon),
                    num(d.e_u.a),
                    num(d.e_u.b),
                    num(d.e_s.a),
                    num(d.e_s.b),
                    num(d.drift_u),
                    num(d.drift_s),
                    num(d.transversality()),
                ]);
                last = Some(d);
            }
            write_csv(
                &out.join("directions.csv"),
                &echo,
                &["horizon", "eu_a", "eu_b", "es_a", "es_b", "drift_u", "drift_s", "transversality"],
                &rows,
            )?;
            let d = last.expect("at least one horizon");
            println!(
                "E_u = ({:.12}, {:.12}), E_s = ({:.12}, {:.12}), drift ({:.3e}, {:.3e}), converged {}",
                d.e_u.a,
                d.e_u.b,
                d.e_s.a,
                d.e_s.b,
                d.drift_u,
                d.drift_s,
                d.converged()
            );
        }
    }
    Ok(())
}
