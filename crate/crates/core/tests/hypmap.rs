use hypman_core::billiard::{
    cone_norm, periodic_orbit, periodic_samples, BilliardTable, Disk, PhaseCoordinates, PhasePoint,
};
use hypman_core::graphtransform::{
    compute_manifold, figure2_map, normalize_fixed_point, HyperbolicityParams, PlanarMap, Which,
};
use hypman_core::hypmap::{
    adapted_metric, cone_certify, continuity_probe, global_manifold, line_angle,
    local_manifolds_periodic, nesting_defect, perturbed_cat_map, stable_unstable_directions,
    AdaptedFrame, LocalOptions, OrbitData, SignCone,
};
use hypman_core::{Mat2, Vec2};

fn two_disks() -> BilliardTable {
    BilliardTable::exterior_disks(vec![
        Disk::new(Vec2::zeros(), 1.0),
        Disk::new(Vec2::new(4.0, 0.0), 1.0),
    ])
    .unwrap()
}

fn billiard_orbit(table: &BilliardTable, word: &[usize]) -> (PlanarMap, OrbitData) {
    let coords = PhaseCoordinates::new(table);
    let map = coords.planar_map();
    let orbit = periodic_orbit(table, word).unwrap();
    let data = OrbitData::from_map(&map, coords.encode(orbit[0]), orbit.len()).unwrap();
    (map, data)
}

#[test]
fn two_disk_monodromy() {
    let (_, orbit) = billiard_orbit(&two_disks(), &[0, 1]);
    let m = orbit.monodromy(0);
    assert!((m.trace() - 34.0).abs() < 1e-9);
    assert!((m.determinant() - 1.0).abs() < 1e-9);
    let d = stable_unstable_directions(&orbit).unwrap();
    // mu + 1/mu = 34
    let mu = 17.0 + 288f64.sqrt();
    assert!((d.mu - mu).abs() < 1e-9);
    assert!((d.lambda - 1.0 / mu).abs() < 1e-12);
    assert!((d.mu - 33.9706).abs() < 1e-4);
}

#[test]
fn fixed_point_directions_match_normalization() {
    let m = figure2_map();
    let orbit = OrbitData::from_map(&m, Vec2::zeros(), 1).unwrap();
    let d = stable_unstable_directions(&orbit).unwrap();
    let nm = normalize_fixed_point(&m, &HyperbolicityParams::default(), 0.05).unwrap();
    let b = nm.source().basis();
    assert!(line_angle(d.e_u[0], b.column(0).into()) < 1e-14);
    assert!(line_angle(d.e_s[0], b.column(1).into()) < 1e-14);
}

/// `|v|_s^2` by the defining sum with full differentials.
fn norm_s_oracle(orbit: &OrbitData, i: usize, v: Vec2, lt: f64, m: usize) -> f64 {
    let p = orbit.period();
    let mut w = v;
    let mut sum = 0.0;
    for n in 0..m {
        sum += lt.powi(-2 * n as i32) * w.norm_squared();
        w = orbit.jacobians[(i + n) % p] * w;
    }
    sum.sqrt()
}

fn norm_u_oracle(orbit: &OrbitData, i: usize, v: Vec2, lt: f64, m: usize) -> f64 {
    let p = orbit.period();
    let mut w = v;
    let mut sum = 0.0;
    for n in 0..m {
        sum += lt.powi(-2 * n as i32) * w.norm_squared();
        w = orbit.jacobians[(i + p - 1 - n % p) % p].try_inverse().unwrap() * w;
    }
    sum.sqrt()
}

#[test]
fn adapted_metric_inequalities() {
    let (_, orbit) = billiard_orbit(&two_disks(), &[0, 1]);
    let d = stable_unstable_directions(&orbit).unwrap();
    let lt = 1.05 * d.rate();
    let g = adapted_metric(&d, lt).unwrap();
    for i in 0..2 {
        let next = (i + 1) % 2;
        let prev = (i + 1) % 2;
        let es = d.e_s[i];
        let s_lhs = norm_s_oracle(&orbit, next, orbit.jacobians[i] * es, lt, g.m_used);
        let s_rhs = lt * norm_s_oracle(&orbit, i, es, lt, g.m_used);
        assert!(s_lhs <= s_rhs * (1.0 + 1e-9), "{s_lhs} {s_rhs}");
        let eu = d.e_u[i];
        let back = orbit.jacobians[prev].try_inverse().unwrap() * eu;
        let u_lhs = norm_u_oracle(&orbit, prev, back, lt, g.m_used);
        let u_rhs = lt * norm_u_oracle(&orbit, i, eu, lt, g.m_used);
        assert!(u_lhs <= u_rhs * (1.0 + 1e-9), "{u_lhs} {u_rhs}");
        assert!((g.norm_s[i] - norm_s_oracle(&orbit, i, es, lt, g.m_used)).abs() < 1e-9 * g.norm_s[i]);
    }
}

#[test]
fn chart_isometry() {
    let (map, orbit) = billiard_orbit(&two_disks(), &[0, 1]);
    let frame = AdaptedFrame::new(&map, &orbit, 0.5).unwrap();
    for i in 0..2 {
        let c = frame.chart(i, 1.0).unwrap();
        let eu = frame.directions.e_u[i] / frame.metric.norm_u[i];
        let es = frame.directions.e_s[i] / frame.metric.norm_s[i];
        let l = c.linear_to_normalized();
        assert!(((l * eu).norm() - 1.0).abs() < 1e-9);
        assert!(((l * es).norm() - 1.0).abs() < 1e-9);
        assert!((l * eu)[1].abs() < 1e-12 && (l * es)[0].abs() < 1e-12);
    }
}

#[test]
fn figure2_local_manifolds_match_fixed_point_construction() {
    let m = figure2_map();
    let orbit = OrbitData::from_map(&m, Vec2::zeros(), 1).unwrap();
    let lm = local_manifolds_periodic(&m, &orbit, &LocalOptions::default()).unwrap();
    let nm = normalize_fixed_point(&m, &HyperbolicityParams::default(), 0.05).unwrap();
    for which in [Which::Unstable, Which::Stable] {
        let oracle = compute_manifold(&nm, which, 1e-12, 60).unwrap();
        let local = lm.graph(which, 0);
        let mut checked = 0;
        for k in 0..=200 {
            let s = -1.0 + k as f64 / 100.0;
            let x = local.point(s).unwrap();
            if let Ok(d) = oracle.distance_to_manifold(x) {
                // normalized units of the oracle chart back to ambient
                assert!(d * nm.scale() <= 1e-8, "{which:?} s={s} {d:e}");
                checked += 1;
            }
        }
        assert!(checked > 20);
    }
}

#[test]
fn two_disk_local_manifolds() {
    let (map, orbit) = billiard_orbit(&two_disks(), &[0, 1]);
    let tol = 1e-11;
    let opts = LocalOptions {
        tol,
        ..LocalOptions::default()
    };
    let lm = local_manifolds_periodic(&map, &orbit, &opts).unwrap();
    let d = stable_unstable_directions(&orbit).unwrap();
    for i in 0..2 {
        let ts = lm.stable[i].tangent().unwrap();
        let tu = lm.unstable[i].tangent().unwrap();
        assert!(line_angle(ts, d.e_s[i]) <= 1e-6);
        assert!(line_angle(tu, d.e_u[i]) <= 1e-6);
        // phi maps the stable curve at x_i into the stable curve at x_{i+1}
        let next = &lm.stable[(i + 1) % 2];
        for k in 0..=40 {
            let y = map.forward(lm.stable[i].point(-1.0 + k as f64 / 20.0).unwrap()).unwrap();
            let dist = next.distance_to_manifold(y).unwrap();
            assert!(dist <= 10.0 * tol, "{dist:e}");
        }
    }
    // time reversal symmetry swaps the curves: W_u is the mirror of W_s
    let ps = lm.stable[0].point(0.7).unwrap();
    let mirrored = Vec2::new(ps[0], -ps[1]);
    assert!(lm.unstable[0].distance_to_manifold(mirrored).unwrap() < 1e-9);
}

#[test]
fn cat_map_global_manifolds() {
    let m = perturbed_cat_map(0.3);
    let orbit = OrbitData::from_map(&m, Vec2::new(0.5, 0.5), 3).unwrap();
    let lm = local_manifolds_periodic(&m, &orbit, &LocalOptions::default()).unwrap();
    let w0 = global_manifold(&m, &lm, Which::Unstable, 0, 0).unwrap();
    let local = lm.graph(Which::Unstable, 0);
    for c in w0.vertices() {
        assert!((c.x - local.point(c.s).unwrap()).norm() == 0.0);
    }
    let mut prev = w0;
    for k in 1..=4 {
        let wk = global_manifold(&m, &lm, Which::Unstable, 0, k).unwrap();
        assert!(!wk.truncated);
        let defect = nesting_defect(&prev, &wk);
        assert!(defect <= 1e-6, "k={k} {defect:e}");
        assert!(wk.length() > prev.length());
        prev = wk;
    }
    // W_u^(4) is longer than the torus and wraps around it
    assert!(prev.length() > 1.0, "{}", prev.length());
    let ws = global_manifold(&m, &lm, Which::Stable, 0, 4).unwrap();
    assert!(ws.length() > 1.0);
}

#[test]
fn three_disk_cone_certificate() {
    let t = BilliardTable::three_disks(1.0, 6.0).unwrap();
    let coords = PhaseCoordinates::new(&t);
    let samples: Vec<Vec2> = periodic_samples(&t, 7).unwrap().into_iter().map(|p| coords.encode(p)).collect();
    assert!(samples.len() >= 200);
    let cert = cone_certify(
        &coords.planar_map(),
        &samples,
        SignCone::NonNegative,
        SignCone::NonPositive,
        |x, v| cone_norm(x[1], v),
    );
    assert_eq!(cert.failures(), 0);
    assert!(cert.lambda_measured > 1.0, "{}", cert.lambda_measured);
    assert!(cert.valid());
}

#[test]
fn convex_disk_fails_certification() {
    let t = BilliardTable::unit_disk();
    let coords = PhaseCoordinates::new(&t);
    let samples: Vec<Vec2> = (0..20)
        .map(|k| coords.encode(PhasePoint::new(0, 0.3 * k as f64 - 3.0, -0.9 + 0.09 * k as f64)))
        .collect();
    let cert = cone_certify(
        &coords.planar_map(),
        &samples,
        SignCone::NonNegative,
        SignCone::NonPositive,
        |x, v| cone_norm(x[1], v),
    );
    assert!(cert.failures() > 0);
    assert!(!cert.valid());
}

#[test]
fn continuity_probe_outputs() {
    let (map, orbit) = billiard_orbit(&two_disks(), &[0, 1]);
    let pairs = continuity_probe(&map, &orbit.points, 20, 10).unwrap();
    assert_eq!(pairs.len(), 1);
    assert!(pairs[0].gap.is_finite() && pairs[0].distance > 0.0);

    let t = BilliardTable::three_disks(1.0, 6.0).unwrap();
    let coords = PhaseCoordinates::new(&t);
    let samples: Vec<Vec2> = periodic_samples(&t, 7).unwrap().into_iter().take(100).map(|p| coords.encode(p)).collect();
    let pairs = continuity_probe(&coords.planar_map(), &samples, 10, 100).unwrap();
    assert!(!pairs.is_empty());
    assert!(pairs.windows(2).all(|w| w[0].distance <= w[1].distance));
}

#[test]
fn linear_global_manifold_is_scaled_segment() {
    let mu = 2.0;
    let m = PlanarMap::linear(Mat2::new(mu, 0.0, 0.0, 0.5)).unwrap();
    let orbit = OrbitData::from_map(&m, Vec2::zeros(), 1).unwrap();
    let lm = local_manifolds_periodic(&m, &orbit, &LocalOptions::default()).unwrap();
    let l0 = global_manifold(&m, &lm, Which::Unstable, 0, 0).unwrap().length();
    for k in 1..=3 {
        let g = global_manifold(&m, &lm, Which::Unstable, 0, k).unwrap();
        assert!((g.length() - mu.powi(k as i32) * l0).abs() < 1e-9 * g.length());
        assert!(g.vertices().all(|c| c.x[1] == 0.0));
    }
}
