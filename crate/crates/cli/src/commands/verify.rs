use std::io::Write as _;

use hypman_core::billiard::{billiard_differential, billiard_map, BilliardTable, Disk, PhaseCoordinates, PhasePoint, TableKind, trapped_set};
use hypman_core::geoflow::{
    estimate_stable_unstable, jacobi_flow, verify_cones, FlowState, IsothermalSurface, JacobiVector, DEFAULT_STEP,
};
use hypman_core::graphtransform::{compute_manifold, contraction_ratio, Which};
use hypman_core::hypmap::{line_angle, local_manifolds_periodic, stable_unstable_directions, LocalOptions, OrbitData};
use hypman_core::numcore::{fd_jacobian, integrate, ChebGrid, FnField, GridFunction, DEFAULT_NODES};
use hypman_core::{Mat2, Vec2};

use crate::commands::geodesic::cone_params;
use crate::config::{MapSpec, RunConfig, TableSpec};
use crate::CliError;

type Outcome = Result<(bool, String), CliError>;

fn grid_cubic(a: f64, b: f64, c: f64) -> Result<GridFunction, CliError> {
    let grid = ChebGrid::new(DEFAULT_NODES)?;
    Ok(GridFunction::from_fn(grid, move |x| a * x + b * x * x + c * x * x * x))
}

fn spectral() -> Outcome {
    let f = grid_cubic(-1.0, 0.0, 1.0)?;
    let d = f.derivative(1)?;
    let err = (0..=40)
        .map(|k| -1.0 + k as f64 / 20.0)
        .map(|x| d.eval(x).map(|v| (v - (3.0 * x * x - 1.0)).abs()))
        .try_fold(0.0f64, |m, e| e.map(|e| m.max(e)))?;
    Ok((err <= 1e-10, format!("derivative error {err:.2e}")))
}

fn rk4_order() -> Outcome {
    let f = FnField::new(1, |s: &[f64], out: &mut [f64]| out[0] = s[0]);
    let e = |h: f64| -> Result<f64, CliError> { Ok((integrate(&f, &[1.0], 0.0, 1.0, h)?[0] - 1f64.exp()).abs()) };
    let ratio = e(0.1)? / e(0.05)?;
    Ok(((14.0..=18.0).contains(&ratio), format!("error ratio {ratio:.3} for halved step")))
}

fn fd_linear() -> Outcome {
    let m = Mat2::new(1.0, 2.0, 3.0, 4.0);
    let j = fd_jacobian(|x| m * x, Vec2::new(0.3, -0.7), 1e-3)?;
    let err = (j - m).abs().max();
    Ok((err <= 1e-10, format!("error {err:.2e}")))
}

/// Deterministic admissible cubic coefficients.
fn pair(k: usize) -> [[f64; 3]; 2] {
    let s = |i: usize| (1.7 * (k * 6 + i) as f64 + 0.3).sin();
    [
        [0.4 * s(0), 0.15 * s(1), 0.05 * s(2)],
        [0.4 * s(3), 0.15 * s(4), 0.05 * s(5)],
    ]
}

fn normalization(cfg: &RunConfig) -> Outcome {
    let mc = cfg.manifold.clone().unwrap_or_default();
    mc.validate()?;
    let nm = super::normalize(&mc.map.build()?, mc.delta_target, mc.n_reg)?;
    let p = *nm.params();
    let bound = p.lambda_t / p.mu_t;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let [f, g] = pair(k);
        for which in [Which::Unstable, Which::Stable] {
            let r = contraction_ratio(&nm, which, &grid_cubic(f[0], f[1], f[2])?, &grid_cubic(g[0], g[1], g[2])?);
            worst = worst.max(r.unwrap_or(f64::INFINITY));
        }
    }
    let ok = p.delta <= mc.delta_target * (1.0 + 1e-6) && worst <= bound;
    Ok((ok, format!("delta {:.3e}, worst contraction {worst:.4} (bound {bound:.4})", p.delta)))
}

fn manifolds(cfg: &RunConfig) -> Outcome {
    let mc = cfg.manifold.clone().unwrap_or_default();
    let nm = super::normalize(&mc.map.build()?, mc.delta_target, mc.n_reg)?;
    let u = compute_manifold(&nm, Which::Unstable, mc.tol, mc.max_iter)?;
    let s = compute_manifold(&nm, Which::Stable, mc.tol, mc.max_iter)?;
    let mut ok = u.residual <= 1e-8 && s.residual <= 1e-8;
    ok &= u.slope_at_zero()?.abs() <= 1e-8 && s.slope_at_zero()?.abs() <= 1e-8;
    let (cu, cs) = (u.taylor_coefficient()?, s.taylor_coefficient()?);
    if mc.map == MapSpec::Figure2 {
        ok &= (cu - 1.0 / 7.0).abs() <= 1e-4 && (cs + 2.0 / 7.0).abs() <= 1e-4;
    }
    Ok((
        ok,
        format!(
            "residuals ({:.1e}, {:.1e}), iterations ({}, {}), quadratic ({cu:.6}, {cs:.6})",
            u.residual, s.residual, u.iterations, s.iterations
        ),
    ))
}

fn two_disk_orbit() -> Outcome {
    let table = BilliardTable::exterior_disks(vec![Disk::new(Vec2::zeros(), 1.0), Disk::new(Vec2::new(4.0, 0.0), 1.0)])?;
    let coords = PhaseCoordinates::new(&table);
    let map = coords.planar_map();
    let orbit = table.period2_orbit(0, 1)?;
    let data = OrbitData::from_map(&map, coords.encode(orbit[0]), 2)?;
    let d = stable_unstable_directions(&data)?;
    let lm = local_manifolds_periodic(&map, &data, &LocalOptions::default())?;
    let mut angle: f64 = 0.0;
    for i in 0..2 {
        angle = angle.max(line_angle(lm.unstable[i].tangent()?, d.e_u[i]));
        angle = angle.max(line_angle(lm.stable[i].tangent()?, d.e_s[i]));
    }
    let trace = data.monodromy(0).trace();
    Ok(((trace - 34.0).abs() <= 1e-9 && angle <= 1e-6, format!("trace {trace:.12}, tangency angle {angle:.2e}")))
}

fn unit_disk_closed_form() -> Outcome {
    let t = BilliardTable::unit_disk();
    let mut err: f64 = 0.0;
    for k in 0..100 {
        let theta = 0.0628 * k as f64;
        let sigma = -0.95 + 0.019 * k as f64;
        let b = billiard_map(&t, PhasePoint::new(0, theta, sigma))?
            .hit()
            .ok_or_else(|| CliError::Failed("unit-disk ball escaped".into()))?;
        let expect = (theta + 2.0 * sigma.acos()).rem_euclid(std::f64::consts::TAU);
        let d = (b.to.theta - expect).rem_euclid(std::f64::consts::TAU);
        err = err.max(d.min(std::f64::consts::TAU - d)).max((b.to.sigma - sigma).abs());
    }
    Ok((err <= 1e-9, format!("max error {err:.2e}")))
}

fn configured_table(cfg: &RunConfig) -> Result<(BilliardTable, TableSpec, [usize; 2], usize), CliError> {
    let bc = cfg.billiard.clone().unwrap_or_default();
    bc.validate()?;
    Ok((bc.table.build()?, bc.table.clone(), bc.pair, bc.n_max))
}

fn period2(cfg: &RunConfig) -> Outcome {
    let (table, _, [i, j], _) = configured_table(cfg)?;
    if table.kind() != TableKind::ExteriorDisks || table.disks().len() < 2 {
        return Ok((true, "not applicable to this table".into()));
    }
    let orbit = table.period2_orbit(i, j)?;
    let coords = PhaseCoordinates::new(&table);
    let map = coords.planar_map();
    let mut fd_err: f64 = 0.0;
    let mut det_err: f64 = 0.0;
    for p in orbit {
        let a = billiard_differential(&table, p)?;
        let fd = map.fd_jacobian(coords.encode(p), 1e-6)?;
        fd_err = fd_err.max((a - fd).abs().max());
        det_err = det_err.max((a.determinant() - 1.0).abs());
    }
    let mono = billiard_differential(&table, orbit[1])? * billiard_differential(&table, orbit[0])?;
    let hyperbolic = mono.trace().abs() > 2.0;
    Ok((
        fd_err <= 1e-5 && det_err <= 1e-9 && hyperbolic,
        format!("trace {:.9}, det error {det_err:.1e}, FD error {fd_err:.1e}", mono.trace()),
    ))
}

fn trapped(cfg: &RunConfig) -> Outcome {
    let (table, spec, _, n_max) = configured_table(cfg)?;
    if table.kind() != TableKind::ExteriorDisks {
        return Ok((true, "not applicable to this table".into()));
    }
    let grid = trapped_set(&table, 0, (128, 128), n_max)?;
    let sym = grid.reflection_agreement();
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for n in 0..=n_max.min(8) {
        let f = trapped_set(&table, 0, (64, 64), n)?.trapped_fraction();
        monotone &= f <= prev;
        prev = f;
    }
    let symmetric = !matches!(spec, TableSpec::ThreeDisks { .. }) || sym >= 0.999;
    Ok((symmetric && monotone, format!("reflection agreement {sym:.4}, monotone {monotone}")))
}

fn curvature(cfg: &RunConfig) -> Outcome {
    let gc = cfg.geodesic.clone().unwrap_or_default();
    gc.validate()?;
    let s = gc.surface.build()?;
    let (x, y) = (gc.start[0], gc.start[1]);
    let k = s.curvature(x, y)?;
    let fd = s.clone().without_laplacian().curvature(x, y)?;
    Ok(((k - fd).abs() <= 1e-6 * k.abs().max(1.0), format!("K = {k:.10}, finite differences {fd:.10}")))
}

fn jacobi_closed_form() -> Outcome {
    let s = IsothermalSurface::poincare();
    let st = FlowState::new(0.0, 0.0, 0.5);
    let t = 3.0;
    let e = f64::exp(t);
    let u = jacobi_flow(&s, st, JacobiVector::new(1.0, -1.0), t, DEFAULT_STEP)?;
    let v = jacobi_flow(&s, st, JacobiVector::new(1.0, 1.0), t, DEFAULT_STEP)?;
    let err = ((u.a - e) / e).abs().max(((u.b + e) / e).abs()).max(((v.a - 1.0 / e) * e).abs()).max(((v.b - 1.0 / e) * e).abs());
    Ok((err <= 1e-9, format!("relative error {err:.2e}")))
}

fn cones(cfg: &RunConfig) -> Outcome {
    let gc = cfg.geodesic.clone().unwrap_or_default();
    let s = gc.surface.build()?;
    let p = cone_params(&gc, &s)?;
    let rep = verify_cones(&s, gc.start_state(), &p, gc.t_max, gc.n_dirs, gc.step)?;
    let growth = rep.directions.iter().map(|d| d.min_growth).fold(f64::INFINITY, f64::min);
    Ok((rep.passed(), format!("{} directions, min growth ratio {growth:.4}", rep.directions.len())))
}

fn directions(cfg: &RunConfig) -> Outcome {
    let gc = cfg.geodesic.clone().unwrap_or_default();
    let s = gc.surface.build()?;
    let p = cone_params(&gc, &s)?;
    let d = estimate_stable_unstable(&s, gc.start_state(), &p, gc.horizon, gc.step)?;
    let bound = (-p.nu * gc.horizon).exp();
    Ok((
        d.drift_u <= bound && d.drift_s <= bound && d.transversality() >= 1e-3,
        format!("drift ({:.1e}, {:.1e}) vs {bound:.1e}, transversality {:.3}", d.drift_u, d.drift_s, d.transversality()),
    ))
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("numcore spectral derivative", Box::new(spectral)),
        ("numcore rk4 order", Box::new(rk4_order)),
        ("numcore fd jacobian", Box::new(fd_linear)),
        ("graphtransform normalization", Box::new(|| normalization(cfg))),
        ("graphtransform manifolds", Box::new(|| manifolds(cfg))),
        ("hypmap two-disk orbit", Box::new(two_disk_orbit)),
        ("billiard unit disk", Box::new(unit_disk_closed_form)),
        ("billiard period 2", Box::new(|| period2(cfg))),
        ("billiard trapped set", Box::new(|| trapped(cfg))),
        ("geoflow curvature", Box::new(|| curvature(cfg))),
        ("geoflow jacobi closed form", Box::new(jacobi_closed_form)),
        ("geoflow cones", Box::new(|| cones(cfg))),
        ("geoflow directions", Box::new(|| directions(cfg))),
    ];
    let mut failures = 0;
    for (name, f) in &checks {
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e @ CliError::Usage(_)) => return Err(e),
            Err(e) => (false, e.to_string()),
        };
        if !ok {
            failures += 1;
        }
        // a closed pipe must not turn the verdict into a panic
        let _ = writeln!(std::io::stdout(), "{name:<30} {}  {detail}", if ok { "PASS" } else { "FAIL" });
    }
    if failures > 0 {
        return Err(CliError::Failed(format!("{failures} of {} checks failed", checks.len())));
    }
    Ok(())
}
