use std::fmt::Write as _;
use std::path::Path;

use hypman_core::billiard::{
    billiard_differential, period2_hyperbolic, trajectory, trapped_set_with, BilliardTable, PhasePoint,
    TableKind, TrappedOptions,
};

use crate::config::{BilliardConfig, BilliardMode, RunConfig};
use crate::output::{num, write_csv, write_text, Svg};
use crate::CliError;

const CLOSE_TOL: f64 = 1e-9;

fn same_phase_point(table: &BilliardTable, a: PhasePoint, b: PhasePoint) -> Result<bool, CliError> {
    if a.component != b.component || (a.sigma - b.sigma).abs() > CLOSE_TOL {
        return Ok(false);
    }
    let period = table.component_length(a.component)?;
    let d = (a.theta - b.theta).rem_euclid(period);
    Ok(d.min(period - d) <= CLOSE_TOL)
}

fn run_map(bc: &BilliardConfig, table: &BilliardTable, echo: &str, out: &Path) -> Result<(), CliError> {
    let start: PhasePoint = bc.start.into();
    let bounces = trajectory(table, start, bc.bounces)?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut push = |k: usize, p: PhasePoint, length: f64| -> Result<(), CliError> {
        let x = table.boundary_data(p.component, p.theta)?.x;
        rows.push(vec![
            k.to_string(),
            p.component.to_string(),
            num(p.theta),
            num(p.sigma),
            num(x[0]),
            num(x[1]),
            num(length),
        ]);
        points.push((x[0], x[1]));
        Ok(())
    };
    push(0, start, 0.0)?;
    let mut closes = None;
    for (k, b) in bounces.iter().enumerate() {
        push(k + 1, b.to, b.length)?;
        if closes.is_none() && same_phase_point(table, b.to, start)? {
            closes = Some(k + 1);
        }
    }
    write_csv(
        &out.join("billiard_map.csv"),
        echo,
        &["bounce", "component", "theta", "sigma", "x", "y", "length"],
        &rows,
    )?;
    let mut svg = Svg::default();
    for d in table.disks() {
        svg.circle((d.center[0], d.center[1]), d.radius, "black");
    }
    if table.kind() == TableKind::ExteriorDisks && bounces.len() < bc.bounces {
        // the ball leaves the table along its last outgoing ray
        let last = bounces.last().map_or(start, |b| b.to);
        let x = table.boundary_data(last.component, last.theta)?.x;
        let w = hypman_core::billiard::outgoing_direction(table, last)?;
        let reach = table.disks().iter().map(|d| (d.center - x).norm() + d.radius).fold(0.0, f64::max);
        points.push((x[0] + reach * w[0], x[1] + reach * w[1]));
    }
    svg.polyline(points, "#c0392b");
    svg.write(&out.join("billiard_map.svg"), echo)?;
    println!("{} bounces", bounces.len());
    match closes {
        Some(k) => println!("closes after {k} bounces"),
        None => println!("does not close within {} bounces", bounces.len()),
    }
    Ok(())
}

fn run_trapped(bc: &BilliardConfig, table: &BilliardTable, echo: &str, out: &Path) -> Result<(), CliError> {
    let opts = TrappedOptions {
        n_theta: bc.resolution,
        n_sigma: bc.resolution,
        n_max: bc.n_max,
        ..TrappedOptions::default()
    };
    let grid = trapped_set_with(table, bc.component, &opts)?;
    std::fs::write(out.join("trapped.pgm"), grid.to_pgm(echo))?;
    let mut side = grid.header();
    let _ = writeln!(side, "reflection_agreement = {:.17e}", grid.reflection_agreement());
    write_text(&out.join("trapped.txt"), echo, &side)?;
    println!(
        "trapped fraction {:.6e}, reflection agreement {:.6}",
        grid.trapped_fraction(),
        grid.reflection_agreement()
    );
    Ok(())
}

fn run_period2(bc: &BilliardConfig, table: &BilliardTable, echo: &str, out: &Path) -> Result<(), CliError> {
    let [i, j] = bc.pair;
    let orbit = table.period2_orbit(i, j)?;
    let xi = table.boundary_data(i, orbit[0].theta)?;
    let xj = table.boundary_data(j, orbit[1].theta)?;
    let length = (xi.x - xj.x).norm();
    let report = period2_hyperbolic(length, table.curvature(i)?, table.curvature(j)?)?;
    let mono = billiard_differential(table, orbit[1])? * billiard_differential(table, orbit[0])?;
    let body = format!(
        "components = {i} {j}\nlength = {}\nK1 = {}\nK2 = {}\ntrace = {}\nmonodromy_trace = {}\nmonodromy_det = {}\nproduct = {}\nhyperbolic = {}\n",
        num(report.length),
        num(report.k1),
        num(report.k2),
        num(report.trace),
        num(mono.trace()),
        num(mono.determinant()),
        num(report.product),
        report.hyperbolic
    );
    write_text(&out.join("period2.txt"), echo, &body)?;
    print!("{body}");
    Ok(())
}

pub fn run(cfg: &RunConfig, mode: Option<BilliardMode>, out: &Path) -> Result<(), CliError> {
    let mut bc = cfg.billiard.clone().unwrap_or_default();
    if let Some(m) = mode {
        bc.mode = m;
    }
    bc.validate()?;
    let table = bc.table.build()?;
    let echo = cfg.echo();
    match bc.mode {
        BilliardMode::Map => run_map(&bc, &table, &echo, out),
        BilliardMode::Trapped => run_trapped(&bc, &table, &echo, out),
        BilliardMode::Period2 => run_period2(&bc, &table, &echo, out),
    }
}
