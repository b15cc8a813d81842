use std::path::Path;

use hypman_core::graphtransform::{compute_manifold_on, ManifoldGraph, PlanarMap, Which};
use hypman_core::hypmap::{
    global_manifold, local_manifolds_periodic, GlobalManifold, LocalOptions, OrbitData, REFINE_SPACING,
};
use hypman_core::numcore::ChebGrid;
use hypman_core::Vec2;

use crate::config::{ManifoldConfig, RunConfig};
use crate::output::{num, write_csv, Svg};
use crate::CliError;

const UNSTABLE_COLOR: &str = "#c0392b";
const STABLE_COLOR: &str = "#2471a3";

fn polyline_rows(points: &[Vec2]) -> Vec<Vec<String>> {
    points.iter().map(|p| vec![num(p[0]), num(p[1])]).collect()
}

fn log_rows(graphs: &[&ManifoldGraph]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for g in graphs {
        let name = match g.which {
            Which::Unstable => "unstable",
            Which::Stable => "stable",
        };
        let mut prev: Option<f64> = None;
        for r in &g.log {
            let ratio = prev.filter(|p| *p > 0.0).map_or(String::new(), |p| num(r.distance_c1 / p));
            rows.push(vec![
                name.to_string(),
                r.iteration.to_string(),
                num(r.distance_c1),
                num(r.distance_cn),
                ratio,
                num(g.residual),
            ]);
            prev = Some(r.distance_c1);
        }
    }
    rows
}

/// Consecutive vertices more than this far apart in raw coordinates are a
/// wrap of a periodic coordinate, not a segment.
const WRAP_JUMP: f64 = 4.0 * REFINE_SPACING;

fn global_segments(g: &GlobalManifold) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for piece in &g.pieces {
        let mut cur: Vec<(f64, f64)> = Vec::new();
        for c in piece {
            if let Some(&(x, y)) = cur.last() {
                if (c.x[0] - x).abs().max((c.x[1] - y).abs()) > WRAP_JUMP {
                    out.push(std::mem::take(&mut cur));
                }
            }
            cur.push((c.x[0], c.x[1]));
        }
        out.push(cur);
    }
    out
}

fn write_globals(
    map: &PlanarMap,
    cfg: &ManifoldConfig,
    orbit: &OrbitData,
    echo: &str,
    out: &Path,
    svg: &mut Svg,
) -> Result<(Vec<Vec2>, Vec<Vec2>, Vec<ManifoldGraph>), CliError> {
    let opts = LocalOptions {
        n_reg: cfg.n_reg,
        delta_target: cfg.delta_target,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..LocalOptions::default()
    };
    let lm = local_manifolds_periodic(map, orbit, &opts)?;
    for (which, name, color) in [
        (Which::Unstable, "global_unstable.csv", UNSTABLE_COLOR),
        (Which::Stable, "global_stable.csv", STABLE_COLOR),
    ] {
        let g = global_manifold(map, &lm, which, 0, cfg.global_iterations)?;
        let rows: Vec<Vec<String>> = g
            .pieces
            .iter()
            .enumerate()
            .flat_map(|(k, p)| p.iter().map(move |c| vec![k.to_string(), num(c.s), num(c.x[0]), num(c.x[1])]))
            .collect();
        write_csv(&out.join(name), echo, &["piece", "s", "x1", "x2"], &rows)?;
        for seg in global_segments(&g) {
            svg.polyline(seg, color);
        }
        println!(
            "{which:?} W^({}): {} vertices, length {:.6}{}",
            cfg.global_iterations,
            g.vertex_count(),
            g.length(),
            if g.truncated { " (truncated)" } else { "" }
        );
    }
    let u = lm.graph(Which::Unstable, 0).polyline(cfg.samples)?;
    let s = lm.graph(Which::Stable, 0).polyline(cfg.samples)?;
    Ok((u, s, vec![lm.unstable[0].clone(), lm.stable[0].clone()]))
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let mc = cfg.manifold.clone().unwrap_or_default();
    mc.validate()?;
    let echo = cfg.echo();
    let map = mc.map.build()?;
    let mut svg = Svg::default();

    let (unstable, stable, graphs) = match &mc.orbit {
        None => {
            let nm = super::normalize(&map, mc.delta_target, mc.n_reg)?;
            let grid = ChebGrid::new(mc.nodes)?;
            let u = compute_manifold_on(grid.clone(), &nm, Which::Unstable, mc.tol, mc.max_iter)?;
            let s = compute_manifold_on(grid, &nm, Which::Stable, mc.tol, mc.max_iter)?;
            println!(
                "delta1 = {:.6e}, delta = {:.6e}, iterations (u, s) = ({}, {}), residual (u, s) = ({:.3e}, {:.3e})",
                nm.scale(),
                nm.params().delta,
                u.iterations,
                s.iterations,
                u.residual,
                s.residual
            );
            println!(
                "quadratic coefficients: unstable {:.10}, stable {:.10}",
                u.taylor_coefficient()?,
                s.taylor_coefficient()?
            );
            if mc.global_iterations > 0 {
                let orbit = OrbitData::from_map(&map, map.fixed_point(), 1)?;
                write_globals(&map, &mc, &orbit, &echo, out, &mut svg)?;
            }
            (u.polyline(mc.samples)?, s.polyline(mc.samples)?, vec![u, s])
        }
        Some(o) => {
            let orbit = OrbitData::from_map(&map, Vec2::new(o.point[0], o.point[1]), o.period)?;
            write_globals(&map, &mc, &orbit, &echo, out, &mut svg)?
        }
    };
    write_csv(&out.join("unstable.csv"), &echo, &["x1", "x2"], &polyline_rows(&unstable))?;
    write_csv(&out.join("stable.csv"), &echo, &["x1", "x2"], &polyline_rows(&stable))?;
    write_csv(
        &out.join("convergence.csv"),
        &echo,
        &["which", "iteration", "distance_c1", "distance_cn", "ratio", "final_residual"],
        &log_rows(&graphs.iter().collect::<Vec<_>>()),
    )?;
    svg.polyline(unstable.iter().map(|p| (p[0], p[1])).collect(), UNSTABLE_COLOR);
    svg.polyline(stable.iter().map(|p| (p[0], p[1])).collect(), STABLE_COLOR);
    svg.write(&out.join("manifold.svg"), &echo)?;
    Ok(())
}
